#include "doctest.h"

#include <vector>

#include "../oracles.hpp"
#include "cpdd/dynamics.hpp"
#include "cpdd/random.hpp"
#include "cpdd/sequences.hpp"
#include "cpdd/units.hpp"

using namespace cpdd;

namespace {

// H written out independently of hamiltonian_at
Complex2Matrix h_rwa(const DriveSegment& s, const SignalField& f, double t) {
  return from_pauli(0.0, 0.5 * s.rabi * std::cos(s.phase), 0.5 * s.rabi * std::sin(s.phase),
                    -0.5 * s.carrier_detuning + f.amplitude * std::cos(f.angular_frequency * t + f.phase));
}

Complex2Matrix h_lab(double w0, const DriveSegment& s, const SignalField& f, double t) {
  return from_pauli(0.0, s.rabi * std::cos((w0 + s.carrier_detuning) * t + s.phase), 0.0,
                    0.5 * w0 + f.amplitude * std::cos(f.angular_frequency * t + f.phase));
}

// exp(−iAσ/2)-style rotation from the Taylor oracle
Complex2Matrix rot(const Complex2Matrix& pauli, double angle) {
  return oracle::expm_series(complex(0.5) * pauli, angle);
}

// (−1)^{n/2} Rz(2 Σ(φ_{2k} − φ_{2k−1})) Rz(Θ), Rz(a) = exp(−i a σz/2)
Complex2Matrix ideal_cpdd(const std::vector<double>& phases, double theta) {
  double sum = 0;
  for (std::size_t k = 0; k + 1 < phases.size(); k += 2) sum += phases[k + 1] - phases[k];
  const double sign = (phases.size() / 2) % 2 == 0 ? 1.0 : -1.0;
  return complex(sign) * rot(pauli::sigma_z(), 2 * sum + theta);
}

double norm2(const Complex2Matrix& a) {
  // largest singular value via the 2x2 eigenvalues of A†A
  const Complex2Matrix b = a.adjoint() * a;
  const double tr = b.trace().real(), det = b.determinant().real();
  return std::sqrt(0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4 * det))));
}

}  // namespace

TEST_CASE("signal field conversions") {
  const auto f = SignalField::from_magnetic_field(3.33e-6, angular(8e6));
  CHECK(f.amplitude == doctest::Approx(kGammaNV * 3.33e-6 / 2));
  CHECK(f.magnetic_amplitude() == doctest::Approx(3.33e-6));
  CHECK_THROWS(SignalField{1.0, -1.0, 0.0}.validate());
}

TEST_CASE("rotating frame without signal is one exact exponential per segment") {
  const DriveSegment segs[] = {{1e-6, angular(1e6), 0.3, angular(50e3)}, {0.5e-6, angular(2e6), 1.1, 0.0}};
  const auto r = evolve(FrameChoice::rotating(), segs, std::nullopt, 1e-7);
  SignalField none{};
  Complex2Matrix ref = Complex2Matrix::identity();
  for (const auto& s : segs) ref = oracle::expm_series(h_rwa(s, none, 0.0), s.duration) * ref;
  CHECK(oracle::max_diff(r.final.matrix(), ref) < 1e-12);
}

TEST_CASE("rotating frame with a signal matches RK4") {
  const double wl = angular(4e6);
  const SignalField f{angular(200e3), wl, 0.4};
  const DriveSegment segs[] = {{0.125e-6, wl, 0.0, angular(10e3)}, {0.125e-6, wl, kPi / 2, angular(10e3)}};
  Complex2Matrix ref = Complex2Matrix::identity();
  double t0 = 0;
  for (const auto& s : segs) {
    ref = oracle::rk4([&](double t) { return h_rwa(s, f, t); }, t0, t0 + s.duration, 20000) * ref;
    t0 += s.duration;
  }
  const double h = 0.125e-6 / 400;
  const double e1 = oracle::max_diff(evolve(FrameChoice::rotating(), segs, f, h).final.matrix(), ref);
  const double e2 = oracle::max_diff(evolve(FrameChoice::rotating(), segs, f, h / 4).final.matrix(), ref);
  CHECK(e2 < 1e-7);
  // converges onto the oracle, not onto something nearby
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("lab frame matches RK4") {
  const double w0 = angular(20e6);
  const SignalField f{angular(300e3), angular(1e6), 1.0};
  const DriveSegment seg{0.3e-6, angular(2e6), 0.7, angular(100e3)};
  const auto ref = oracle::rk4([&](double t) { return h_lab(w0, seg, f, t); }, 0.0, seg.duration, 30000);
  auto err = [&](double h) {
    return oracle::max_diff(evolve(FrameChoice::lab(w0), std::span(&seg, 1), f, h).final.matrix(), ref);
  };
  const double e1 = err(1e-10), e2 = err(2.5e-11);
  CHECK(e2 < 1e-6);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("dressed frame analytic propagator matches the exponential oracle") {
  CounterRng rng(9, 0);
  for (int i = 0; i < 50; ++i) {
    const double g = angular(100e3) * rng.uniform(), d = angular(200e3) * (2 * rng.uniform() - 1),
                 xi = kTwoPi * rng.uniform(), t = 5e-6 * rng.uniform();
    const Complex2Matrix h = from_pauli(0.0, -0.5 * d, -0.5 * g * std::sin(xi), 0.5 * g * std::cos(xi));
    CHECK(oracle::max_diff(dressed_propagator_analytic(g, d, xi, t).matrix(), oracle::expm_series(h, t)) < 1e-12);
  }
}

TEST_CASE("dressed evolution reproduces the ideal CPDD propagator, 100 random phase lists") {
  const double wl = angular(8e6), T = kPi / wl;
  CounterRng rng(10, 0);
  double worst = 0, worst_lib = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 * (1 + static_cast<std::size_t>(rng.uniform() * 32));
    std::vector<double> phases(n);
    for (double& p : phases) p = kTwoPi * rng.uniform();
    std::vector<DriveSegment> segs;
    for (double p : phases) segs.push_back({T, wl, p, 0.0});
    const double g = angular(5e3 + 50e3 * rng.uniform());
    const auto r = evolve(FrameChoice::dressed(wl), segs, SignalField{g, wl, 0.0}, T / 8);
    const double theta = g * T * static_cast<double>(n);
    worst = std::max(worst, oracle::phase_distance(r.final.matrix(), ideal_cpdd(phases, theta)));
    worst_lib = std::max(worst_lib, oracle::max_diff(cpdd_ideal_propagator(phases, theta).matrix(),
                                                     ideal_cpdd(phases, theta)));
  }
  CHECK(worst <= 1e-8);
  CHECK(worst_lib <= 1e-12);
  const std::vector<double> odd(3, 0.0);
  CHECK_THROWS_AS(cpdd_ideal_propagator(odd, 0.1), std::invalid_argument);
}

TEST_CASE("rotating-wave approximation holds at omega0 = 100 Omega over 8 Rabi periods") {
  const double rabi = angular(1e6), w0 = 100 * rabi, period = kTwoPi / rabi;
  const DriveSegment seg{8 * period, rabi, 0.0, 0.0};
  std::vector<double> ts;
  for (int k = 1; k <= 64; ++k) ts.push_back(8 * period * k / 64);
  const auto rwa = evolve(FrameChoice::rotating(), std::span(&seg, 1), std::nullopt, period / 64, ts);
  const auto lab = evolve(FrameChoice::lab(w0), std::span(&seg, 1), std::nullopt,
                          default_substep(FrameChoice::lab(w0), std::span(&seg, 1), std::nullopt), ts);
  REQUIRE(rwa.samples.size() == ts.size());
  REQUIRE(lab.samples.size() == ts.size());
  double worst = 0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    worst = std::max(worst, std::abs(std::norm(rwa.samples[i](1, 0)) - std::norm(lab.samples[i](1, 0))));
  CHECK(worst <= 0.03);
}

TEST_CASE("phase-jump commutator closed form on a 10x10x10 grid") {
  const double wl = angular(8e6), T = kPi / wl;
  CounterRng rng(12, 0);
  double worst = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k) {
        const double t1 = T * (i + 0.5) / 10, jump = kTwoPi * j / 10, theta = kTwoPi * (k + 0.5) / 10;
        const double xi = kTwoPi * rng.uniform();
        const auto c = phase_change_commutator_norm(wl, t1, xi, jump, theta);
        const double closed = std::abs(2 * std::sin(wl * t1 + xi) * std::sin(jump / 2) * std::sin(theta / 2));
        const Complex2Matrix a =
            rot(pauli::sigma_x(), -wl * t1) * rot(pauli::sigma_z(), -jump) * rot(pauli::sigma_x(), wl * t1);
        const Complex2Matrix b = rot(pauli::sigma_x(), xi) * rot(pauli::sigma_z(), theta) * rot(pauli::sigma_x(), -xi);
        const double numeric = norm2(a * b - b * a);
        worst = std::max({worst, std::abs(c.closed_form - closed), std::abs(c.numeric - numeric),
                          std::abs(closed - numeric)});
      }
  CHECK(worst <= 1e-10);
}

TEST_CASE("substep convergence is second order on the CXY8 scenario") {
  const double wl = angular(8e6), T = kPi / wl;
  const auto segs = to_segments(build_cxy8(wl - angular(200e3), T, 4));
  const SignalField f{angular(11.7e3), wl, 0.3};
  const auto frame = FrameChoice::rotating();
  const double h0 = max_substep(frame, segs, f);
  const auto ref = evolve(frame, segs, f, h0 / 64).final.matrix();
  std::vector<double> hs, errs;
  for (double h : {h0, h0 / 2, h0 / 4}) {
    hs.push_back(h);
    errs.push_back(oracle::max_diff(evolve(frame, segs, f, h).final.matrix(), ref));
  }
  CHECK(oracle::loglog_slope(hs, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("substeps coarser than the oscillation bound are rejected") {
  const DriveSegment seg{1e-6, angular(1e6), 0.0, 0.0};
  const SignalField f{angular(1e3), angular(8e6), 0.0};
  const double bound = max_substep(FrameChoice::rotating(), std::span(&seg, 1), f);
  CHECK(bound == doctest::Approx(1.0 / (50 * 8e6)));
  CHECK_THROWS_AS(evolve(FrameChoice::rotating(), std::span(&seg, 1), f, 2 * bound), SubstepError);
  CHECK(default_substep(FrameChoice::rotating(), std::span(&seg, 1), f) <= bound);
}

TEST_CASE("evolution is unitary and deterministic") {
  const double wl = angular(8e6);
  const auto segs = to_segments(build_cxy8(wl, kPi / wl, 50));
  const SignalField f{angular(30e3), wl, 0.2};
  const auto a = evolve(FrameChoice::rotating(), segs, f, 1e-9);
  const auto b = evolve(FrameChoice::rotating(), segs, f, 1e-9);
  CHECK(a.final.unitarity_error() < 1e-13);
  CHECK(oracle::max_diff(a.final.matrix(), b.final.matrix()) == 0.0);
}
