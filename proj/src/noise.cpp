#include "cpdd/noise.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "cpdd/detail/su2_kernel.hpp"
#include "cpdd/units.hpp"

namespace cpdd {

using detail::Su2;

double NoiseDistribution::sample(CounterRng& rng) const {
  switch (kind) {
    case Kind::Fixed: return 0.0;
    case Kind::Uniform: return width * (2.0 * rng.uniform() - 1.0);
    case Kind::Gaussian: return width * rng.normal();
  }
  return 0.0;
}

void NoiseDistribution::validate() const {
  if (!(width >= 0.0) || !std::isfinite(width))
    throw std::invalid_argument("noise distribution width must be >= 0");
}

NoiseParams NoiseParams::draw(CounterRng& rng) const {
  NoiseParams out;
  out.detuning = detuning + detuning_spread.sample(rng);
  out.amplitude_error = amplitude_error + amplitude_spread.sample(rng);
  return out;
}

std::vector<DriveSegment> apply_noise(std::span<const DriveSegment> segments, double detuning,
                                      double amplitude_error) {
  std::vector<DriveSegment> out(segments.begin(), segments.end());
  for (auto& s : out) {
    if (s.rabi > 0.0) {
      s.rabi = std::max(0.0, s.rabi - amplitude_error);
      s.carrier_detuning += detuning;
    }
  }
  return out;
}

PulseError pulse_error_from_noise(double rabi, double larmor, double detuning) {
  if (!(larmor > 0.0)) throw std::invalid_argument("pulse error needs omega_L > 0");
  const DriveSegment seg{kPi / larmor, rabi, 0.0, detuning};
  const auto r = evolve(FrameChoice::rotating(), std::span(&seg, 1), std::nullopt, seg.duration);
  const Unitary2& u = r.final;
  PulseError e;
  e.epsilon = std::clamp(1.0 - std::norm(u(1, 0)), 0.0, 1.0);
  e.alpha = std::arg(u(0, 0));
  e.beta = std::arg(-u(1, 0));
  return e;
}

Unitary2 parameterized_pulse(const PulseError& e, double phase) {
  if (!(e.epsilon >= 0.0 && e.epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  const double se = std::sqrt(e.epsilon);
  const double sp = std::sqrt(1.0 - e.epsilon);
  const double b = e.beta + phase;
  return Unitary2::from_matrix_unchecked({se * std::polar(1.0, e.alpha), sp * std::polar(1.0, -b),
                                          -sp * std::polar(1.0, b), se * std::polar(1.0, -e.alpha)});
}

Unitary2 phased_product(const PulseError& e, std::span<const double> phases) {
  Unitary2 u;
  for (double p : phases) u = parameterized_pulse(e, p) * u;
  return u;
}

double fidelity_zero8_analytic(double epsilon, double alpha) {
  const double c = std::cos(alpha);
  return 1.0 - 32.0 * c * c * c * c * epsilon;
}

double fidelity_xy8_analytic(double epsilon, double alpha) {
  const double s = std::cos(alpha) + std::cos(3.0 * alpha);
  return 1.0 - 4.0 * s * s * epsilon * epsilon * epsilon;
}

std::size_t RobustnessMap::area_above(double threshold) const {
  return static_cast<std::size_t>(
      std::count_if(fidelity.begin(), fidelity.end(), [&](double f) { return f > threshold; }));
}

void RobustnessMap::write_csv(std::ostream& os) const {
  os.precision(12);
  os << "delta_over_omegaL\\Delta_over_omegaL";
  for (double a : amplitude_errors) os << ',' << a / larmor;
  os << '\n';
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    os << detunings[i] / larmor;
    for (std::size_t j = 0; j < amplitude_errors.size(); ++j) os << ',' << at(i, j);
    os << '\n';
  }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> v(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + step * static_cast<double>(i);
  v.back() = hi;
  return v;
}

namespace {

// Every segment is static in the carrier frame without a signal, so one
// exact exponential per segment suffices.
Su2 static_product(std::span<const DriveSegment> segs, double detuning, double amplitude_error) {
  Su2 u;
  std::size_t count = 0;
  for (const auto& s : segs) {
    double rabi = s.rabi;
    double delta = s.carrier_detuning;
    if (rabi > 0.0) {
      rabi = std::max(0.0, rabi - amplitude_error);
      delta += detuning;
    }
    const Su2 step = Su2::step(0.5 * rabi * std::cos(s.phase), 0.5 * rabi * std::sin(s.phase),
                               -0.5 * delta, s.duration);
    u = step * u;
    if (++count % 1000 == 0) u.renormalize();
  }
  u.renormalize();
  return u;
}

// |Tr(U0†U)|/2 for SU(2) elements is |Re a| of U0†U.
double su2_fidelity(const Su2& u, const Su2& u0) {
  return std::min(1.0, std::abs((u0.adjoint() * u).ar));
}

void check_grid(std::span<const double> d, std::span<const double> a) {
  if (d.size() < 2 || a.size() < 2) throw std::invalid_argument("robustness grid must be at least 2x2");
}

template <class CellFn>
RobustnessMap fill_map(double larmor, std::span<const double> detunings,
                       std::span<const double> amplitude_errors, Exec exec, CellFn&& cell) {
  check_grid(detunings, amplitude_errors);
  RobustnessMap m;
  m.larmor = larmor;
  m.detunings.assign(detunings.begin(), detunings.end());
  m.amplitude_errors.assign(amplitude_errors.begin(), amplitude_errors.end());
  const std::size_t nd = detunings.size();
  const std::size_t na = amplitude_errors.size();
  m.fidelity.assign(nd * na, 0.0);
  const auto n = static_cast<std::int64_t>(nd * na);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t idx = 0; idx < n; ++idx) {
      const auto i = static_cast<std::size_t>(idx);
      m.fidelity[i] = cell(i / na, i % na, i);
    }
  } else {
    for (std::int64_t idx = 0; idx < n; ++idx) {
      const auto i = static_cast<std::size_t>(idx);
      m.fidelity[i] = cell(i / na, i % na, i);
    }
  }
  return m;
}

}  // namespace

Unitary2 sequence_propagator(const SequenceSpec& spec, double detuning, double amplitude_error) {
  const auto segs = to_segments(spec);
  return static_product(segs, detuning, amplitude_error).to_unitary();
}

RobustnessMap robustness_map(const SequenceSpec& spec, double larmor,
                             std::span<const double> detunings,
                             std::span<const double> amplitude_errors, Exec exec) {
  const auto segs = to_segments(spec);
  const Su2 ideal = static_product(segs, 0.0, 0.0);
  return fill_map(larmor, detunings, amplitude_errors, exec,
                  [&](std::size_t i, std::size_t j, std::size_t) {
                    return su2_fidelity(static_product(segs, detunings[i], amplitude_errors[j]), ideal);
                  });
}

RobustnessMap robustness_map_monte_carlo(const SequenceSpec& spec, double larmor,
                                         std::span<const double> detunings,
                                         std::span<const double> amplitude_errors,
                                         const NoiseDistribution& detuning_spread,
                                         const NoiseDistribution& amplitude_spread,
                                         std::size_t shots, std::uint64_t seed, Exec exec) {
  if (shots < 1) throw std::invalid_argument("need at least one Monte-Carlo shot");
  detuning_spread.validate();
  amplitude_spread.validate();
  const auto segs = to_segments(spec);
  const Su2 ideal = static_product(segs, 0.0, 0.0);
  return fill_map(larmor, detunings, amplitude_errors, exec,
                  [&](std::size_t i, std::size_t j, std::size_t cell) {
                    CounterRng rng(seed, cell);
                    // running mean: identical shots leave it exactly unchanged
                    double mean = 0.0;
                    for (std::size_t s = 0; s < shots; ++s) {
                      const double d = detunings[i] + detuning_spread.sample(rng);
                      const double a = amplitude_errors[j] + amplitude_spread.sample(rng);
                      mean += (su2_fidelity(static_product(segs, d, a), ideal) - mean) / static_cast<double>(s + 1);
                    }
                    return mean;
                  });
}

}  // namespace cpdd
