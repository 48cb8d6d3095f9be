#pragma once

// Quasi-static detuning and amplitude noise, the per-pulse error triple
// (ε, α̃, β), analytic fidelity expansions and fidelity maps.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cpdd/parallel.hpp"
#include "cpdd/random.hpp"
#include "cpdd/sequences.hpp"
#include "cpdd/su2.hpp"

namespace cpdd {

struct NoiseDistribution {
  enum class Kind { Fixed, Uniform, Gaussian };
  Kind kind = Kind::Fixed;
  double width = 0.0;  ///< half-width (uniform) or standard deviation (Gaussian)

  /// Zero-mean draw; Fixed always returns 0 without consuming randomness.
  double sample(CounterRng& rng) const;
  void validate() const;
};

/// δ is a carrier detuning; Δ = ω_L − Ω enters as Ω → Ω − Δ on every driven
/// segment. Both are held constant over one sequence.
struct NoiseParams {
  double detuning = 0.0;         ///< δ, rad/s
  double amplitude_error = 0.0;  ///< Δ, rad/s
  NoiseDistribution detuning_spread;
  NoiseDistribution amplitude_spread;

  /// One quasi-static realization (spreads collapsed to fixed values).
  NoiseParams draw(CounterRng& rng) const;
};

/// Applies one noise realization to a drive.
std::vector<DriveSegment> apply_noise(std::span<const DriveSegment> segments,
                                      double detuning, double amplitude_error);

struct PulseError {
  double epsilon = 0.0;  ///< 1 − transition probability
  double alpha = 0.0;    ///< α̃ = arg U₀₀, (−π, π]
  double beta = 0.0;     ///< β = arg(−U₁₀), (−π, π]
};

/// Exact error triple of one constant-phase interval T = π/ω_L driven at Ω
/// with carrier detuning δ.
PulseError pulse_error_from_noise(double rabi, double larmor, double detuning);

/// [[√ε e^{iα̃}, √(1−ε) e^{−i(β+φ)}], [−√(1−ε) e^{i(β+φ)}, √ε e^{−iα̃}]]
Unitary2 parameterized_pulse(const PulseError& e, double phase);

/// U(φ_n)···U(φ_1)
Unitary2 phased_product(const PulseError& e, std::span<const double> phases);

/// Leading-order expansions for eight pulses.
double fidelity_zero8_analytic(double epsilon, double alpha);
double fidelity_xy8_analytic(double epsilon, double alpha);

/// Fidelity over a (δ, Δ) grid, rows indexed by δ.
struct RobustnessMap {
  double larmor = 0.0;
  std::vector<double> detunings;         ///< δ, rad/s
  std::vector<double> amplitude_errors;  ///< Δ, rad/s
  std::vector<double> fidelity;          ///< row-major [δ][Δ]

  double at(std::size_t i_delta, std::size_t j_amp) const {
    return fidelity[i_delta * amplitude_errors.size() + j_amp];
  }
  /// Number of cells with F above `threshold`.
  std::size_t area_above(double threshold) const;
  /// CSV with a header row of Δ/ω_L and a first column of δ/ω_L.
  void write_csv(std::ostream& os) const;
};

/// Uniform grid of n points spanning [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Noise-free sequence propagator in the carrier frame (no sensed field).
Unitary2 sequence_propagator(const SequenceSpec& spec, double detuning, double amplitude_error);

RobustnessMap robustness_map(const SequenceSpec& spec, double larmor,
                             std::span<const double> detunings,
                             std::span<const double> amplitude_errors,
                             Exec exec = Exec::Parallel);

/// Mean fidelity per cell over `shots` quasi-static draws around each grid
/// point. RNG stream = cell index, so the result is independent of threads.
RobustnessMap robustness_map_monte_carlo(const SequenceSpec& spec, double larmor,
                                         std::span<const double> detunings,
                                         std::span<const double> amplitude_errors,
                                         const NoiseDistribution& detuning_spread,
                                         const NoiseDistribution& amplitude_spread,
                                         std::size_t shots, std::uint64_t seed,
                                         Exec exec = Exec::Parallel);

}  // namespace cpdd
