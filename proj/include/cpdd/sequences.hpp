#pragma once

// Drive waveforms for continuous and pulsed decoupling protocols.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cpdd/dynamics.hpp"

namespace cpdd {

enum class Protocol { CX, RotaryEcho, CXY4, CXY8, PulsedXY8, Custom };

std::string to_string(Protocol p);

namespace phase_tables {
/// (0, 1, 0, 1, 1, 0, 1, 0)·π/2
std::vector<double> xy8();
/// first half of xy8
std::vector<double> xy4();
std::vector<double> rotary_echo();
}  // namespace phase_tables

/// A repeated phase table. For continuous protocols every table entry is
/// one constant-phase interval of length `interval`; for PulsedXY8 every
/// entry is one pulse slot of length `interval` (τ) holding a centred pulse
/// of length `pulse_length`.
struct SequenceSpec {
  Protocol protocol = Protocol::CXY8;
  std::vector<double> phase_table;
  double interval = 0.0;      ///< T or τ, s
  double pulse_length = 0.0;  ///< t_p, s (pulsed only)
  std::size_t repetitions = 1;
  double rabi = 0.0;  ///< Ω, rad/s
  /// Extra phase added to every segment of repetition r (empty = none).
  std::vector<double> block_phases;
  /// Shortened first interval; see align_first_interval().
  std::optional<double> first_interval;

  bool randomized() const { return !block_phases.empty(); }
  bool pulsed() const { return protocol == Protocol::PulsedXY8; }
  std::size_t intervals() const { return phase_table.size() * repetitions; }
  double block_duration() const { return interval * static_cast<double>(phase_table.size()); }
  double total_duration() const;
  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// Single continuous segment at phase π/2 relative to the preparation pulse.
std::vector<DriveSegment> build_cx(double rabi, double total_time);

/// Constant-phase drive cut into `intervals` pieces of length T at phase π/2,
/// so it shares the CPDD interval grid.
SequenceSpec build_cx_intervals(double rabi, double interval, std::size_t intervals);
SequenceSpec build_cxy8(double rabi, double interval, std::size_t repetitions);
SequenceSpec build_cxy4(double rabi, double interval, std::size_t repetitions);
SequenceSpec build_rotary_echo(double rabi, double interval, std::size_t repetitions);
SequenceSpec build_custom(double rabi, double interval, std::size_t repetitions,
                          std::vector<double> phase_table);
/// Finite π pulses (t_p = π/Ω) centred in slots of length τ with XY8 phases.
SequenceSpec build_xy8_pulsed(double rabi, double tau, std::size_t repetitions);

/// Adds one uniform phase in [0, 2π) per repetition, drawn from `seed`.
SequenceSpec randomize_global_phase(const SequenceSpec& spec, std::uint64_t seed);

/// Shortens the first interval to t₁ ∈ (0, T] with ω_L t₁ + ξ ≡ 0 (mod π).
SequenceSpec align_first_interval(const SequenceSpec& spec, double larmor, double xi);

std::vector<DriveSegment> to_segments(const SequenceSpec& spec);
/// Times at which each repetition ends.
std::vector<double> block_end_times(const SequenceSpec& spec);

/// Reads a phase table: one value per line in units of π, '#' comments.
std::vector<double> read_phase_table(const std::filesystem::path& path);
std::vector<double> parse_phase_table(const std::string& text);

struct QdyneSchedule {
  double sequence_duration = 0.0;  ///< t_seq, s
  double overhead = 0.0;           ///< t_oh, s
  double period = 0.0;             ///< T_L = t_seq + t_oh, s
  std::uint64_t measurements = 0;  ///< M

  double start_time(std::uint64_t k) const { return static_cast<double>(k) * period; }
  double total_time() const { return static_cast<double>(measurements) * period; }
  /// ξ_k = ξ₀ + 2π ν₀ k T_L reduced to [0, 2π), evaluated via the
  /// fractional cycle count so it stays exact for k ~ 10⁷.
  double signal_phase(std::uint64_t k, double signal_hz, double xi0) const;
  void validate() const;
};

QdyneSchedule build_qdyne_schedule(const SequenceSpec& spec, double overhead,
                                   std::uint64_t measurements);

}  // namespace cpdd
