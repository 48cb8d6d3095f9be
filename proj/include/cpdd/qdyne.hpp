#pragma once

// Quantum heterodyne (Qdyne) traces: synthesis from the CPDD slope-readout
// model, spectral analysis with beat-frequency unfolding, time scaling,
// and shot-noise sensitivity.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cpdd/fitting.hpp"
#include "cpdd/parallel.hpp"
#include "cpdd/sensing.hpp"
#include "cpdd/sequences.hpp"

namespace cpdd {

struct QdyneConfig {
  QdyneSchedule schedule;
  SequenceSpec sequence;
  double signal_hz = 8000001.8883;  ///< ν₀
  double amplitude = angular(46.7e3);  ///< g, rad/s
  double xi0 = 0.0;
  MeasurementModel model;
  std::uint64_t seed = 1;
  double prior_hz = 8000001.0;  ///< ν_prior for unfolding

  void validate() const;
};

/// Full-scale defaults: CXY8-10 at 8 MHz (t_seq = 5 μs), t_oh = 3.646 μs,
/// N_ph = 0.164, a − b = 0.32, T₂ = 250 μs. `measurements` defaults to 120 s.
QdyneConfig reference_qdyne_config(std::uint64_t measurements = 13'900'000);

struct QdyneTrace {
  std::vector<std::uint32_t> counts;
  double period = 0.0;  ///< T_L
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  double total_time() const { return period * static_cast<double>(counts.size()); }
};

/// Θ_k = 2κ g t_seq cos ξ_k
double qdyne_phase(const QdyneConfig& cfg, std::uint64_t k);
/// N_ph·[1 + ((a − b)/(a + b))·e^{−Γ(t_seq)}·c_k] for coherent slope factor c_k.
double qdyne_rate(const QdyneConfig& cfg, double coherent);
/// Expected counts for measurements [first, first + n) from the analytic phase.
std::vector<double> expected_rates(const QdyneConfig& cfg, std::uint64_t first, std::size_t n);
/// Same, with every measurement simulated as a full unitary evolution.
std::vector<double> expected_rates_unitary(const QdyneConfig& cfg, std::uint64_t first, std::size_t n,
                                           FrameChoice::Kind frame = FrameChoice::Kind::Dressed,
                                           Exec exec = Exec::Parallel);

/// Poisson counts from the analytic rates; stream k draws measurement k.
QdyneTrace simulate_trace(const QdyneConfig& cfg, Exec exec = Exec::Parallel);

struct QdyneAnalysis {
  FitResult fit;           ///< Lorentzian on the trace spectrum
  double beat_hz = 0.0;    ///< fitted f_b
  double beat_err_hz = 0.0;
  double lo_hz = 0.0;      ///< ν_LO = m/T_L of the chosen branch
  int sign = +1;           ///< ν₀ = ν_LO + sign·f_b
  double nu0_hz = 0.0;
  double nu0_err_hz = 0.0;
  double linewidth_hz = 0.0;  ///< 2σ
  double snr = 0.0;
  double bin_width_hz = 0.0;  ///< padded bin spacing
  double false_alarm_level = 0.0;  ///< peak magnitude pure noise exceeds with the configured probability
  std::size_t peak_bin = 0;   ///< padded bin index
  bool detected = false;
  bool ambiguous = false;

  std::string to_json() const;
};

struct QdyneAnalysisOptions {
  /// Fit window half-width in natural bins (1/T_tot).
  std::size_t window_bins = 50;
  /// Zero-padding factor; resolves the peak shape so its width tracks 1/T_tot.
  std::size_t padding = 4;
  double snr_threshold = 3.0;
  /// Probability that pure noise anywhere in the searched band would pass;
  /// the peak must clear the matching Rayleigh level as well as the SNR threshold.
  double false_alarm = 0.01;
  /// Restrict the peak search to within this many natural bins of `center_hint_hz`
  /// (0 = search the whole spectrum).
  std::size_t search_bins = 0;
  double center_hint_hz = 0.0;
};

/// ν_prior picks the branch m/T_L ± f_b nearest to it.
QdyneAnalysis analyze_series(std::span<const double> samples, double period, double prior_hz,
                             const QdyneAnalysisOptions& opt = {});
QdyneAnalysis analyze_trace(const QdyneTrace& trace, double prior_hz,
                            const QdyneAnalysisOptions& opt = {});

/// Nearest alias candidate and an ambiguity flag.
struct Unfolded {
  double nu0_hz;
  double lo_hz;
  int sign;
  bool ambiguous;
};
Unfolded unfold_frequency(double beat_hz, double period, double prior_hz);

struct ScalingRow {
  double total_time = 0.0;  ///< slice duration T_tot, s
  std::size_t slices = 0;
  double linewidth_hz = 0.0;
  double nu0_err_hz = 0.0;
  double snr = 0.0;
};

struct ScalingAnalysis {
  std::vector<ScalingRow> rows;
  double linewidth_slope = 0.0;
  double nu0_err_slope = 0.0;
  double snr_slope = 0.0;
};

/// Disjoint slices of each length (in samples), fit outputs averaged per
/// length, log-log slopes against T_tot.
ScalingAnalysis scaling_analysis(const QdyneTrace& trace, std::span<const std::size_t> slice_lengths,
                                 double prior_hz, Exec exec = Exec::Parallel);

/// η(t) = 2/(γ κ C(t)) · √(t + t_oh)/(√N_ph t), T/√Hz.
double sensitivity_shot_noise(const MeasurementModel& model, double t, double overhead);
/// t = ½(T₂/2 − t_oh + √(T₂²/4 + 3 T₂ t_oh + t_oh²)) for a simple exponential decay.
double optimal_sensing_time(double t2, double overhead);

struct FitSensitivity {
  double frequency;  ///< δν₀·T^{3/2}, Hz/Hz^{3/2}
  double amplitude;  ///< B₀/SNR·T^{1/2}, T/√Hz
};
FitSensitivity sensitivity_from_fit(double nu0_err_hz, double snr, double b0_tesla, double total_time);

void write_trace_csv(const QdyneTrace& trace, const std::filesystem::path& path);
void write_trace_binary(const QdyneTrace& trace, const std::filesystem::path& path);
/// Reads either format (binary is recognised by its magic bytes).
QdyneTrace read_trace(const std::filesystem::path& path);

}  // namespace cpdd
