#pragma once

// Measurement protocols built on the dynamics: π/2-wrapped readout, time,
// detuning, frequency and order scans, spurious-harmonic spectra and the
// variance-detection ensembles.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpdd/noise.hpp"
#include "cpdd/parallel.hpp"
#include "cpdd/sequences.hpp"
#include "cpdd/units.hpp"

namespace cpdd {

namespace detail {
struct Su2;
}

struct MeasurementModel {
  double kappa = 0.5;
  double c_max = 1.0;
  double bright = 1.0;  ///< a
  double dark = 0.68;   ///< b
  double t2 = std::numeric_limits<double>::infinity();  ///< s
  double stretch = 1.0;
  double photons = 0.164;  ///< N_ph per readout
  double gamma = kGammaNV;

  /// e^{−(t/T₂)^stretch}
  double envelope(double t) const;
  /// C(t) = (a − b)·e^{−Γ(t)}
  double photon_contrast(double t) const;
  void validate() const;
};

/// Slope: readout phases ±π/2, coherent factor sin Θ.
/// Variance: readout phases 0 and π, coherent factor cos Θ.
enum class Readout { Slope, Variance };

struct BlochVector {
  double x, y, z;
};

/// State after R_x(π/2)|0⟩ followed by `block`.
BlochVector bloch_after(const detail::Su2& block);
/// p₀(φ_a) − p₀(φ_b) of the two alternating readouts, in [−1, 1].
double coherent_contrast(const detail::Su2& block, Readout r);
/// Accumulated angle Θ = atan2(sin-readout, cos-readout).
double accumulated_angle(const detail::Su2& block);
/// |⟨0|R_φ(π/2)·block·R_x(π/2)|0⟩|² for an ideal readout pulse at phase φ.
double readout_population(const detail::Su2& block, double readout_phase);

struct ScanResult {
  std::string x_name = "x";
  std::string x_unit;
  std::string y_name = "contrast";
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t size() const { return x.size(); }
  void validate() const;
  void write_csv(std::ostream& os) const;
  /// Plain whitespace-separated columns for gnuplot.
  void write_dat(std::ostream& os) const;
};

FrameChoice make_frame(FrameChoice::Kind kind, double larmor);

/// Coherent π/2, block, π/2 (readout) measurement with one quasi-static
/// noise realization, scaled by c_max·e^{−Γ(t)}.
double ramsey_wrapped_measurement(const SequenceSpec& block, const SignalField& signal,
                                  const NoiseParams& noise, Readout readout,
                                  const MeasurementModel& model,
                                  FrameChoice::Kind frame = FrameChoice::Kind::RotatingRWA,
                                  double substep = 0.0);

struct TimeScanConfig {
  Protocol protocol = Protocol::CXY8;  ///< CX or CXY8
  double interval = 62.5e-9;          ///< T, s
  double window = 40e-6;              ///< s
  double sample_step = 0.5e-6;        ///< stroboscopic spacing, s
  SignalField signal{angular(11.7e3), angular(8e6), 0.0};
  Readout readout = Readout::Variance;
  MeasurementModel model;
  FrameChoice::Kind frame = FrameChoice::Kind::RotatingRWA;
  double substep = 0.0;  ///< 0 selects the default
};

/// One stroboscopic trace with Ω = ω_L − Δ.
ScanResult time_scan(const TimeScanConfig& cfg, double amplitude_detuning);
std::vector<ScanResult> time_scan(const TimeScanConfig& cfg, std::span<const double> detunings,
                                  Exec exec = Exec::Parallel);
/// Half peak-to-peak of the trace.
double trace_contrast(const ScanResult& trace);
/// x = Δ (Hz), mean = half peak-to-peak contrast.
ScanResult contrast_vs_detuning(const TimeScanConfig& cfg, std::span<const double> detunings,
                                Exec exec = Exec::Parallel);
/// Smallest |Δ| (in the units of x) at which the contrast drops to `level`
/// of its Δ = 0 value, linearly interpolated; +inf when it never does.
double contrast_half_width(const ScanResult& contrast, double level = 0.5);

struct FrequencyScanConfig {
  Protocol protocol = Protocol::CXY8;  ///< CXY8 (Ω = π/T) or PulsedXY8
  std::size_t repetitions = 5;
  SignalField signal{0.0, angular(1.7e6), 0.0};
  /// Fixed Ω for pulsed scans, rad/s.
  double pulsed_rabi = angular(14e6);
  /// Signal phases averaged per point (uniform grid over [0, 2π)); 0 or 1
  /// keeps `signal.phase` fixed. The averaged dip is J₀(Θ) on resonance.
  std::size_t phase_average = 16;
  Readout readout = Readout::Variance;
  MeasurementModel model;
  FrameChoice::Kind frame = FrameChoice::Kind::Dressed;
  double substep = 0.0;
};

/// Signal amplitude that accumulates Θ on resonance after `repetitions`.
double resonant_amplitude_for_angle(const FrequencyScanConfig& cfg, double theta);
/// x = detected frequency f = 1/(2T) in Hz.
ScanResult frequency_scan(const FrequencyScanConfig& cfg, std::span<const double> freqs_hz,
                          Exec exec = Exec::Parallel);
/// Full width at half depth of the dip below the scan maximum (x units).
double dip_fwhm(const ScanResult& scan);

struct OrderScanConfig {
  double larmor = angular(8e6);
  double interval = 62.5e-9;
  std::vector<std::size_t> orders;  ///< CXY8 repetitions N
  double amplitude = angular(46.7e3);
  MeasurementModel model;
  std::size_t shots = 10000;
  std::uint64_t seed = 1;
  FrameChoice::Kind frame = FrameChoice::Kind::Dressed;
  double substep = 0.0;
};

/// Variance-readout contrast averaged over a uniformly random signal phase
/// per shot. x = total time (s).
ScanResult order_scan(const OrderScanConfig& cfg, Exec exec = Exec::Parallel);

/// Same ensemble with a Gaussian amplitude A ~ N(0, B_rms) and ξ = 0.
ScanResult gaussian_variance_scan(const OrderScanConfig& cfg, double b_rms,
                                  Exec exec = Exec::Parallel);

struct SpuriousConfig {
  double larmor = angular(2e6);
  double amplitude_over_rabi = 0.01;  ///< g/Ω at the principal resonance
  std::size_t blocks = 120;           ///< CXY4 repetitions (480 intervals)
  std::size_t runs = 640;             ///< randomized runs averaged
  bool randomized = false;
  std::uint64_t seed = 1;
  Readout readout = Readout::Variance;
  MeasurementModel model;
  double substep = 0.0;
};

/// x = scan position 1/(2T) in Hz with Ω = π/T; mean = 1 − p₀ response.
ScanResult spurious_spectrum(const SpuriousConfig& cfg, std::span<const double> freqs_hz,
                             Exec exec = Exec::Parallel);

struct SpuriousFeature {
  double frequency_hz = 0.0;
  double level = 0.0;  ///< mean response within the feature window
  double ratio = 0.0;  ///< level / baseline
};

struct SpuriousSummary {
  double baseline = 0.0;     ///< mean response away from every feature
  double baseline_sd = 0.0;  ///< scatter of the same points
  std::vector<SpuriousFeature> features;
};

/// Feature levels at `features_hz` (window ±half_window_hz) against the
/// mean response of all points farther than `exclusion_hz` from any
/// feature or from the principal resonance `larmor_hz`.
SpuriousSummary summarize_spurious(const ScanResult& spectrum, double larmor_hz,
                                   std::span<const double> features_hz, double half_window_hz = 10e3,
                                   double exclusion_hz = 150e3);

/// Rate dΘ/dt (rad/s) fitted through the origin over block ends, for the
/// given sequence and signal (no noise, no decay).
double phase_accumulation_rate(const SequenceSpec& spec, const SignalField& signal,
                               FrameChoice::Kind frame = FrameChoice::Kind::RotatingRWA,
                               double substep = 0.0);

}  // namespace cpdd
