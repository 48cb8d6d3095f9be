#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) least squares and the model
// fits used by the scans: Lorentzian peaks, Bessel and Gaussian decays,
// sinusoids.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpdd/spectrum.hpp"

namespace cpdd {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> stderrs;
  double residual_norm = 0.0;  ///< √Σ r²
  bool converged = false;
  bool low_confidence = false;
  int iterations = 0;
  /// Lorentzian fits only: A / noise-floor standard deviation.
  std::optional<double> snr;
  std::optional<double> noise_floor;

  double value(const std::string& name) const;
  double error(const std::string& name) const;
  std::string to_json() const;
};

using ModelFn = std::function<double(double x, std::span<const double> p)>;

struct LmOptions {
  int max_iterations = 200;
  double lambda0 = 1e-3;
  double step_tolerance = 1e-10;
  double residual_tolerance = 1e-12;
  /// Finite-difference scale per parameter; defaults to max(|p0|, 1e-8).
  std::vector<double> step_scales;
  /// When set, standard errors use this per-point variance instead of the
  /// residual variance.
  std::optional<double> noise_variance;
};

FitResult levenberg_marquardt(const ModelFn& model, std::span<const double> x,
                              std::span<const double> y, std::vector<double> p0,
                              std::vector<std::string> names, const LmOptions& opt = {});

struct LorentzianOptions {
  double exclusion_widths = 5.0;  ///< noise floor excludes |ν − ν₀| < this·σ
  /// Known floor standard deviation; replaces the in-window estimate, which a
  /// strong peak's leakage inflates.
  std::optional<double> noise_floor;
};

/// 1.4826·MAD, robust to a small fraction of outliers.
double robust_sd(std::span<const double> v);

/// L(ν) = A σ²/((ν₀ − ν)² + σ²) + offset on bins with lo ≤ ν ≤ hi.
/// Parameters: A, nu0 (Hz), sigma (Hz, HWHM), offset.
/// A line with FWHM below the bin spacing is reported as not converged.
FitResult fit_lorentzian(const Spectrum& s, double lo_hz, double hi_hz,
                         const LorentzianOptions& opt = {});
/// Window of ±half_width_bins around `center_bin`.
FitResult fit_lorentzian_bins(const Spectrum& s, std::size_t center_bin,
                              std::size_t half_width_bins = 50,
                              const LorentzianOptions& opt = {});

/// c_max J₀(g t) e^{−(t/T₂)^b} + offset. Parameters: c_max, g (rad/s),
/// T2 (s), b, offset. With `fixed_g` = 0 the J₀ factor is dropped.
FitResult fit_bessel_decay(std::span<const double> t, std::span<const double> c,
                           std::optional<double> fixed_g = std::nullopt);

/// A exp(−κ²γ²B²t²/2) with κ, γ fixed. Parameters: A, B_rms (T).
FitResult fit_gaussian_decay(std::span<const double> t, std::span<const double> c, double kappa,
                             double gamma);

/// a cos(ω t + φ) + offset. Parameters: a, omega (rad/s), phi, offset.
/// Without a guess, ω is seeded from the FFT peak of the samples.
FitResult fit_sinusoid(std::span<const double> t, std::span<const double> y,
                       std::optional<double> omega_guess = std::nullopt);

}  // namespace cpdd
