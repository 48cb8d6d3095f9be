#include "cpdd/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cpdd/special_functions.hpp"
#include "cpdd/units.hpp"
#include "json.hpp"

namespace cpdd {

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw std::out_of_range("no fit parameter named " + name);
}

double FitResult::error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return stderrs[i];
  throw std::out_of_range("no fit parameter named " + name);
}

std::string FitResult::to_json() const {
  nlohmann::json j;
  for (std::size_t i = 0; i < names.size(); ++i) {
    j["params"][names[i]] = params[i];
    j["stderrs"][names[i]] = stderrs[i];
  }
  j["residual_norm"] = residual_norm;
  j["converged"] = converged;
  j["low_confidence"] = low_confidence;
  j["iterations"] = iterations;
  if (snr) j["snr"] = *snr;
  if (noise_floor) j["noise_floor"] = *noise_floor;
  return j.dump(2);
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Problem {
  const ModelFn& model;
  std::span<const double> x;
  std::span<const double> y;

  double residuals(const Vec& p, Vec& r) const {
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    r.resize(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) r[static_cast<Eigen::Index>(i)] = y[i] - model(x[i], ps);
    return r.squaredNorm();
  }

  // d model / d p by central differences
  Mat jacobian(const Vec& p, const std::vector<double>& scales) const {
    const auto m = static_cast<Eigen::Index>(x.size());
    Mat j(m, p.size());
    Vec q = p;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double h = 1e-6 * scales[static_cast<std::size_t>(k)];
      q[k] = p[k] + h;
      const std::span<const double> qs(q.data(), static_cast<std::size_t>(q.size()));
      std::vector<double> up(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) up[i] = model(x[i], qs);
      q[k] = p[k] - h;
      for (std::size_t i = 0; i < x.size(); ++i)
        j(static_cast<Eigen::Index>(i), k) = (up[i] - model(x[i], qs)) / (2.0 * h);
      q[k] = p[k];
    }
    return j;
  }
};

Mat safe_inverse(const Mat& a) {
  Eigen::LDLT<Mat> ldlt(a);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Mat inv = ldlt.solve(Mat::Identity(a.rows(), a.cols()));
    if (inv.allFinite()) return inv;
  }
  return a.completeOrthogonalDecomposition().pseudoInverse();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

double robust_sd(std::span<const double> v) {
  const double med = median(std::vector<double>(v.begin(), v.end()));
  std::vector<double> dev(v.size());
  std::transform(v.begin(), v.end(), dev.begin(), [&](double a) { return std::abs(a - med); });
  return 1.4826 * median(std::move(dev));
}

FitResult levenberg_marquardt(const ModelFn& model, std::span<const double> x,
                              std::span<const double> y, std::vector<double> p0,
                              std::vector<std::string> names, const LmOptions& opt) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: x and y lengths differ");
  if (p0.empty() || names.size() != p0.size())
    throw std::invalid_argument("fit: one name per parameter required");
  if (x.size() < p0.size()) throw std::invalid_argument("fit: fewer points than parameters");

  std::vector<double> scales = opt.step_scales;
  if (scales.empty()) {
    scales.resize(p0.size());
    for (std::size_t k = 0; k < p0.size(); ++k) scales[k] = std::max(std::abs(p0[k]), 1e-8);
  }
  if (scales.size() != p0.size()) throw std::invalid_argument("fit: step scale count mismatch");

  const Problem prob{model, x, y};
  Vec p = Eigen::Map<const Vec>(p0.data(), static_cast<Eigen::Index>(p0.size()));
  Vec r;
  double rss = prob.residuals(p, r);
  if (!std::isfinite(rss)) throw std::invalid_argument("fit: model is not finite at the initial guess");

  FitResult out;
  out.names = std::move(names);
  double lambda = opt.lambda0;
  bool done = rss == 0.0;
  int it = 0;
  while (!done && it < opt.max_iterations) {
    ++it;
    const Mat j = prob.jacobian(p, scales);
    const Mat a = j.transpose() * j;
    const Vec g = j.transpose() * r;
    Vec diag = a.diagonal();
    for (Eigen::Index k = 0; k < diag.size(); ++k)
      if (!(diag[k] > 0.0)) diag[k] = 1.0;
    bool accepted = false;
    while (!accepted) {
      Mat damped = a;
      damped.diagonal() += lambda * diag;
      const Vec step = damped.ldlt().solve(g);
      const Vec trial = p + step;
      Vec r_trial;
      const double rss_trial = step.allFinite() ? prob.residuals(trial, r_trial) : INFINITY;
      if (std::isfinite(rss_trial) && rss_trial <= rss) {
        const double rel_step = step.norm() / (p.norm() + 1e-300);
        const double rel_res = (rss - rss_trial) / (rss + 1e-300);
        p = trial;
        r = std::move(r_trial);
        rss = rss_trial;
        lambda = std::max(lambda * 0.1, 1e-15);
        accepted = true;
        if (rel_step < opt.step_tolerance || rel_res < opt.residual_tolerance || rss == 0.0) done = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // no descent direction left at working precision
          done = true;
          break;
        }
      }
    }
  }
  out.converged = done;
  out.iterations = it;
  out.params.assign(p.data(), p.data() + p.size());
  out.residual_norm = std::sqrt(rss);

  const auto m = static_cast<double>(x.size());
  const auto k = static_cast<double>(p.size());
  const double variance = opt.noise_variance ? *opt.noise_variance : (m > k ? rss / (m - k) : 0.0);
  const Mat j = prob.jacobian(p, scales);
  const Mat cov = variance * safe_inverse(j.transpose() * j);
  out.stderrs.resize(out.params.size());
  for (std::size_t i = 0; i < out.params.size(); ++i) {
    const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    out.stderrs[i] = std::sqrt(std::max(0.0, v));
  }
  return out;
}

FitResult fit_lorentzian(const Spectrum& s, double lo_hz, double hi_hz, const LorentzianOptions& opt) {
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.frequency[i] >= lo_hz && s.frequency[i] <= hi_hz) {
      fx.push_back(s.frequency[i]);
      fy.push_back(s.magnitude[i]);
    }
  }
  if (fx.size() < 8) throw std::invalid_argument("Lorentzian window must contain at least 8 bins");

  const auto peak = static_cast<std::size_t>(std::max_element(fy.begin(), fy.end()) - fy.begin());
  const double center = fx[peak];
  const double offset0 = median(fy);
  const double a0 = std::max(fy[peak] - offset0, 1e-300);
  // half-maximum crossings on both sides
  const double half = offset0 + 0.5 * a0;
  auto crossing = [&](int dir) {
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(peak) + dir;
         i >= 0 && i < static_cast<std::ptrdiff_t>(fx.size()); i += dir) {
      const auto u = static_cast<std::size_t>(i);
      if (fy[u] <= half) {
        const auto v = static_cast<std::size_t>(i - dir);
        const double frac = (fy[v] - half) / std::max(fy[v] - fy[u], 1e-300);
        return std::abs(fx[v] + frac * (fx[u] - fx[v]) - center);
      }
    }
    return s.bin_width;
  };
  const double sigma0 = std::max(0.5 * (crossing(-1) + crossing(1)), 0.5 * s.bin_width);

  // frequencies relative to the peak bin keep the shift parameter well scaled
  std::vector<double> rel(fx.size());
  std::transform(fx.begin(), fx.end(), rel.begin(), [&](double f) { return f - center; });
  const ModelFn model = [](double x, std::span<const double> p) {
    const double sg = p[2] * p[2];
    const double d = p[1] - x;
    return p[0] * sg / (d * d + sg) + p[3];
  };
  LmOptions lm;
  lm.step_scales = {a0, sigma0, sigma0, std::max(std::abs(offset0), 1e-3 * a0)};
  FitResult fit = levenberg_marquardt(model, rel, fy, {a0, 0.0, sigma0, offset0},
                                      {"A", "nu0", "sigma", "offset"}, lm);
  fit.params[1] += center;
  fit.params[2] = std::abs(fit.params[2]);

  const double nu0 = fit.params[1];
  const double sigma = fit.params[2];
  std::vector<double> floor_bins;
  for (std::size_t i = 0; i < fx.size(); ++i)
    if (std::abs(fx[i] - nu0) > opt.exclusion_widths * sigma) floor_bins.push_back(fy[i]);
  if (opt.noise_floor || floor_bins.size() >= 5) {
    const double floor = opt.noise_floor ? *opt.noise_floor : robust_sd(floor_bins);
    fit.noise_floor = floor;
    fit.snr = floor > 0.0 ? fit.params[0] / floor : INFINITY;
    // rescale the covariance from the residual variance to the floor variance
    const double m = static_cast<double>(fx.size());
    const double s2 = fit.residual_norm * fit.residual_norm / (m - 4.0);
    if (s2 > 0.0 && floor > 0.0) {
      const double factor = floor / std::sqrt(s2);
      for (double& e : fit.stderrs) e *= factor;
    }
  } else {
    fit.low_confidence = true;
  }
  // FWHM under one bin is unresolved: the data then pin the area, not A
  if (!(2.0 * sigma >= s.bin_width)) fit.converged = false;
  return fit;
}

FitResult fit_lorentzian_bins(const Spectrum& s, std::size_t center_bin, std::size_t half_width_bins,
                              const LorentzianOptions& opt) {
  if (center_bin >= s.size()) throw std::invalid_argument("Lorentzian centre bin out of range");
  const std::size_t lo = center_bin > half_width_bins ? center_bin - half_width_bins : 1;
  const std::size_t hi = std::min(s.size() - 1, center_bin + half_width_bins);
  return fit_lorentzian(s, s.frequency[lo], s.frequency[hi], opt);
}

FitResult fit_bessel_decay(std::span<const double> t, std::span<const double> c,
                           std::optional<double> fixed_g) {
  if (t.size() != c.size()) throw std::invalid_argument("fit: time and contrast lengths differ");
  if (t.size() < 6) throw std::invalid_argument("Bessel-decay fit needs at least 6 points");
  const double tmax = *std::max_element(t.begin(), t.end());

  if (fixed_g) {
    const double g = *fixed_g;
    const ModelFn model = [g](double x, std::span<const double> p) {
      const double env = std::exp(-std::pow(std::abs(x / p[1]), std::abs(p[2])));
      return p[0] * bessel_j0(g * x) * env + p[3];
    };
    LmOptions lm;
    lm.step_scales = {std::max(std::abs(c[0]), 1e-3), tmax, 1.0, 1e-3};
    FitResult f = levenberg_marquardt(model, t, c, {c[0], tmax, 1.0, 0.0}, {"c_max", "T2", "b", "offset"}, lm);
    f.params[1] = std::abs(f.params[1]);
    f.params[2] = std::abs(f.params[2]);
    return f;
  }

  bool low_confidence = false;
  double g0 = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if ((c[i - 1] > 0.0) != (c[i] > 0.0)) {
      const double frac = c[i - 1] / (c[i - 1] - c[i]);
      const double tz = t[i - 1] + frac * (t[i] - t[i - 1]);
      if (tz > 0.0) g0 = kBesselJ0FirstZero / tz;
      break;
    }
  }
  if (g0 == 0.0) {
    // early curvature: c ≈ c₀(1 − g²t²/4)
    low_confidence = true;
    const std::size_t k = std::min<std::size_t>(t.size() - 1, 3);
    const double drop = 1.0 - c[k] / c[0];
    g0 = drop > 0.0 && t[k] > 0.0 ? 2.0 * std::sqrt(drop) / t[k] : 1.0 / tmax;
  }
  const ModelFn model = [](double x, std::span<const double> p) {
    const double env = std::exp(-std::pow(std::abs(x / p[2]), std::abs(p[3])));
    return p[0] * bessel_j0(p[1] * x) * env + p[4];
  };
  const double c0 = std::abs(c[0]) > 0.0 ? c[0] : 1.0;
  LmOptions lm;
  lm.step_scales = {std::abs(c0), g0, 4.0 * tmax, 1.0, 1e-2 * std::abs(c0)};
  FitResult f = levenberg_marquardt(model, t, c, {c0, g0, 4.0 * tmax, 1.0, 0.0},
                                    {"c_max", "g", "T2", "b", "offset"}, lm);
  f.params[1] = std::abs(f.params[1]);
  f.params[2] = std::abs(f.params[2]);
  f.params[3] = std::abs(f.params[3]);
  f.low_confidence = low_confidence;
  return f;
}

FitResult fit_gaussian_decay(std::span<const double> t, std::span<const double> c, double kappa,
                             double gamma) {
  if (t.size() != c.size()) throw std::invalid_argument("fit: time and contrast lengths differ");
  if (t.size() < 4) throw std::invalid_argument("Gaussian-decay fit needs at least 4 points");
  const double k2g2 = kappa * kappa * gamma * gamma;
  const double a0 = *std::max_element(c.begin(), c.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::vector<double> guesses;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ratio = c[i] / a0;
    if (t[i] > 0.0 && ratio > 0.05 && ratio < 0.98)
      guesses.push_back(std::sqrt(-2.0 * std::log(ratio) / (k2g2 * t[i] * t[i])));
  }
  const double tmax = *std::max_element(t.begin(), t.end());
  const double b_scale = 1.0 / (std::abs(kappa * gamma) * tmax);
  const double b0 = guesses.empty() ? 1e-3 * b_scale : median(guesses);
  const ModelFn model = [k2g2](double x, std::span<const double> p) {
    return p[0] * std::exp(-0.5 * k2g2 * p[1] * p[1] * x * x);
  };
  LmOptions lm;
  lm.step_scales = {std::max(std::abs(a0), 1e-12), std::max(b0, 1e-3 * b_scale)};
  FitResult f = levenberg_marquardt(model, t, c, {a0, b0}, {"A", "B_rms"}, lm);
  f.params[1] = std::abs(f.params[1]);
  return f;
}

FitResult fit_sinusoid(std::span<const double> t, std::span<const double> y,
                       std::optional<double> omega_guess) {
  if (t.size() != y.size()) throw std::invalid_argument("fit: time and value lengths differ");
  if (t.size() < 5) throw std::invalid_argument("sinusoid fit needs at least 5 points");
  double w0;
  if (omega_guess) {
    w0 = *omega_guess;
  } else {
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    const Spectrum s = power_spectrum(y, dt);
    w0 = kTwoPi * s.frequency[s.peak_bin()];
  }
  // linear amplitude/phase/offset for the seeded frequency
  Mat a(static_cast<Eigen::Index>(t.size()), 3);
  Vec b(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = std::cos(w0 * t[i]);
    a(r, 1) = std::sin(w0 * t[i]);
    a(r, 2) = 1.0;
    b[r] = y[i];
  }
  const Vec lin = a.colPivHouseholderQr().solve(b);
  const double amp = std::hypot(lin[0], lin[1]);
  const double phi = std::atan2(-lin[1], lin[0]);
  const ModelFn model = [](double x, std::span<const double> p) {
    return p[0] * std::cos(p[1] * x + p[2]) + p[3];
  };
  LmOptions lm;
  lm.step_scales = {std::max(amp, 1e-12), std::max(std::abs(w0), 1e-12), 1.0, std::max(amp, 1e-12)};
  FitResult f = levenberg_marquardt(model, t, y, {amp, w0, phi, lin[2]}, {"a", "omega", "phi", "offset"}, lm);
  if (f.params[0] < 0.0) {
    f.params[0] = -f.params[0];
    f.params[2] += kPi;
  }
  return f;
}

}  // namespace cpdd
