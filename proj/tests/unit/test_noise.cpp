#include "doctest.h"

#include <sstream>

#include "../oracles.hpp"
#include "cpdd/noise.hpp"
#include "cpdd/units.hpp"

using namespace cpdd;

namespace {

const double kWl = angular(8e6);
const double kT = kPi / kWl;

// the pulse matrix written out from its definition
Complex2Matrix pulse(double eps, double alpha, double beta, double phi) {
  const double se = std::sqrt(eps), sp = std::sqrt(1 - eps);
  return {se * std::polar(1.0, alpha), sp * std::polar(1.0, -(beta + phi)), -sp * std::polar(1.0, beta + phi),
          se * std::polar(1.0, -alpha)};
}

double product_infidelity(double eps, double alpha, const std::vector<double>& phases) {
  Complex2Matrix u = Complex2Matrix::identity(), u0 = Complex2Matrix::identity();
  for (double p : phases) {
    u = pulse(eps, alpha, 0.0, p) * u;
    u0 = pulse(0.0, 0.0, 0.0, p) * u0;
  }
  // 1 − |Tr(U0†U)|/2 via 1 − |t| = (1 − |t|²)/(1 + |t|) to dodge cancellation
  const double t = std::abs((u0.adjoint() * u).trace()) / 2;
  return (1 - t * t) / (1 + t);
}

}  // namespace

TEST_CASE("fidelity order scaling over eps in [1e-4, 1e-2]") {
  const std::vector<double> zero(8, 0.0), xy8 = phase_tables::xy8();
  std::vector<double> eps, f0, f8, l0, l8;
  for (double e = 1e-4; e <= 1.0001e-2; e *= std::sqrt(10.0)) {
    eps.push_back(e);
    f0.push_back(product_infidelity(e, 0.0, zero));
    f8.push_back(product_infidelity(e, 0.0, xy8));
    const PulseError pe{e, 0.0, 0.0};
    l0.push_back(infidelity(phased_product(pe, zero), phased_product(PulseError{}, zero)));
    l8.push_back(infidelity(phased_product(pe, xy8), phased_product(PulseError{}, xy8)));
  }
  CHECK(oracle::loglog_slope(eps, f0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(oracle::loglog_slope(eps, f8) == doctest::Approx(3.0).epsilon(0.1 / 3));
  CHECK(oracle::loglog_slope(eps, l0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(oracle::loglog_slope(eps, l8) == doctest::Approx(3.0).epsilon(0.1 / 3));
  for (std::size_t i = 0; i < eps.size(); ++i) {
    CHECK(l0[i] == doctest::Approx(f0[i]).epsilon(1e-9));
    CHECK(l8[i] == doctest::Approx(f8[i]).epsilon(1e-6));
  }
}

TEST_CASE("leading-order expansions") {
  const std::vector<double> zero(8, 0.0), xy8 = phase_tables::xy8();
  const double e = 1e-5;
  CHECK(1 - fidelity_zero8_analytic(e, 0.0) == doctest::Approx(product_infidelity(e, 0.0, zero)).epsilon(1e-3));
  CHECK(1 - fidelity_xy8_analytic(e, 0.0) == doctest::Approx(product_infidelity(e, 0.0, xy8)).epsilon(1e-3));
}

TEST_CASE("pulse error from exact evolution") {
  // Ω = 0.95 ω_L over T = π/ω_L: transition probability sin²(0.95π/2)
  const auto e = pulse_error_from_noise(0.95 * kWl, kWl, 0.0);
  const double exact = std::pow(std::cos(0.95 * kPi / 2), 2);
  CHECK(e.epsilon == doctest::Approx(exact).epsilon(1e-12));
  CHECK(std::abs(e.epsilon - 0.00616) <= 1e-5);
  // detuned Rabi formula: P = Ω²/Ω_eff² sin²(Ω_eff T/2)
  const double rabi = kWl, d = 0.1 * kWl, weff = std::hypot(rabi, d);
  const double p = rabi * rabi / (weff * weff) * std::pow(std::sin(weff * kT / 2), 2);
  CHECK(pulse_error_from_noise(rabi, kWl, d).epsilon == doctest::Approx(1 - p).epsilon(1e-12));
  CHECK(pulse_error_from_noise(kWl, kWl, 0.0).epsilon < 1e-15);
}

TEST_CASE("epsilon does not depend on the pulse phase") {
  const PulseError e{0.01, 0.2, 0.7};
  for (double phi : {0.0, 0.4, 2.0, 5.0}) CHECK(std::norm(parameterized_pulse(e, phi)(1, 0)) == doctest::Approx(0.99));
  // the same holds for a physically driven interval at any drive phase
  for (double phi : {0.0, 1.0, 3.0}) {
    const DriveSegment seg{kT, 0.93 * kWl, phi, 0.05 * kWl};
    const auto u = oracle::expm_series(
        from_pauli(0, 0.5 * seg.rabi * std::cos(phi), 0.5 * seg.rabi * std::sin(phi), -0.5 * seg.carrier_detuning), kT);
    CHECK(1 - std::norm(u(1, 0)) == doctest::Approx(pulse_error_from_noise(0.93 * kWl, kWl, 0.05 * kWl).epsilon));
  }
  CHECK_THROWS_AS(parameterized_pulse({1.5, 0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("noise distributions") {
  CounterRng rng(1, 0);
  NoiseDistribution fixed;
  CHECK(fixed.sample(rng) == 0.0);
  CounterRng fresh(1, 0);
  CHECK(rng.uniform() == fresh.uniform());  // Fixed consumed nothing

  NoiseDistribution uni{NoiseDistribution::Kind::Uniform, 2.0};
  NoiseDistribution gau{NoiseDistribution::Kind::Gaussian, 3.0};
  double s2 = 0, m = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uni.sample(rng);
    CHECK(std::abs(u) <= 2.0);
    const double g = gau.sample(rng);
    m += g;
    s2 += g * g;
  }
  m /= 1e5;
  CHECK(std::abs(m) < 0.05);
  CHECK(std::sqrt(s2 / 1e5 - m * m) == doctest::Approx(3.0).epsilon(0.02));
  CHECK_THROWS((NoiseDistribution{NoiseDistribution::Kind::Gaussian, -1.0}.validate()));
}

TEST_CASE("apply_noise touches only driven segments") {
  const DriveSegment segs[] = {{1e-6, 0.0, 0.0, 0.0}, {1e-6, 5.0, 1.0, 0.0}};
  const auto out = apply_noise(segs, 2.0, 1.5);
  CHECK(out[0].rabi == 0.0);
  CHECK(out[0].carrier_detuning == 0.0);
  CHECK(out[1].rabi == 3.5);
  CHECK(out[1].carrier_detuning == 2.0);
  CHECK(out[1].phase == 1.0);
}

TEST_CASE("robustness map of CX is symmetric in the carrier detuning") {
  const auto cx = build_cx_intervals(kWl, kT, 8);
  const auto d = linspace(-0.2 * kWl, 0.2 * kWl, 21);
  const auto a = linspace(-0.2 * kWl, 0.2 * kWl, 11);
  const auto map = robustness_map(cx, kWl, d, a);
  double worst = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      worst = std::max(worst, std::abs(map.at(i, j) - map.at(d.size() - 1 - i, j)));
  CHECK(worst <= 1e-9);
  CHECK(map.at(10, 5) == doctest::Approx(1.0));
}

TEST_CASE("robustness maps: XY8 phases enlarge the high-fidelity area") {
  const auto d = linspace(-0.2 * kWl, 0.2 * kWl, 21);
  const auto cx = robustness_map(build_cx_intervals(kWl, kT, 8), kWl, d, d);
  const auto xy8 = robustness_map(build_cxy8(kWl, kT, 1), kWl, d, d);
  CHECK(xy8.area_above(0.99) > 2 * cx.area_above(0.99));
}

TEST_CASE("serial and parallel maps are bit-identical") {
  const auto d = linspace(-0.1 * kWl, 0.1 * kWl, 9);
  const auto spec = build_cxy8(kWl, kT, 2);
  CHECK(robustness_map(spec, kWl, d, d, Exec::Serial).fidelity ==
        robustness_map(spec, kWl, d, d, Exec::Parallel).fidelity);
  const NoiseDistribution g{NoiseDistribution::Kind::Gaussian, 0.01 * kWl};
  CHECK(robustness_map_monte_carlo(spec, kWl, d, d, g, g, 16, 5, Exec::Serial).fidelity ==
        robustness_map_monte_carlo(spec, kWl, d, d, g, g, 16, 5, Exec::Parallel).fidelity);
}

TEST_CASE("zero-width Monte Carlo reproduces the deterministic map exactly") {
  const auto d = linspace(-0.1 * kWl, 0.1 * kWl, 7);
  const auto spec = build_cxy8(kWl, kT, 1);
  const auto det = robustness_map(spec, kWl, d, d);
  const auto mc = robustness_map_monte_carlo(spec, kWl, d, d, {}, {}, 5, 1);
  CHECK(mc.fidelity == det.fidelity);
  const NoiseDistribution zero_uniform{NoiseDistribution::Kind::Uniform, 0.0};
  CHECK(robustness_map_monte_carlo(spec, kWl, d, d, zero_uniform, zero_uniform, 3, 2).fidelity == det.fidelity);
}

TEST_CASE("map CSV layout") {
  const auto d = linspace(-0.1 * kWl, 0.1 * kWl, 3);
  const auto map = robustness_map(build_cxy8(kWl, kT, 1), kWl, d, d);
  std::ostringstream os;
  map.write_csv(os);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(std::count(header.begin(), header.end(), ',') == 3);
  CHECK(row.rfind("-0.1,", 0) == 0);
}

TEST_CASE("linspace") {
  const auto v = linspace(1.0, 2.0, 5);
  REQUIRE(v.size() == 5);
  CHECK(v.front() == 1.0);
  CHECK(v.back() == 2.0);
  CHECK(v[2] == doctest::Approx(1.5));
}
