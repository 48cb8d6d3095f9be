#include "doctest.h"

#include <stdexcept>

#include "../oracles.hpp"
#include "cpdd/random.hpp"
#include "cpdd/su2.hpp"
#include "cpdd/units.hpp"

using namespace cpdd;

namespace {

Complex2Matrix random_hermitian(CounterRng& rng, double scale) {
  const double c0 = scale * (2 * rng.uniform() - 1), x = scale * (2 * rng.uniform() - 1),
               y = scale * (2 * rng.uniform() - 1), z = scale * (2 * rng.uniform() - 1);
  return from_pauli(c0, x, y, z);
}

Unitary2 random_unitary(CounterRng& rng) {
  return expm_hermitian(random_hermitian(rng, 2.0), 1.0);
}

}  // namespace

TEST_CASE("pauli algebra") {
  const auto x = pauli::sigma_x(), y = pauli::sigma_y(), z = pauli::sigma_z();
  CHECK(oracle::max_diff(x * y, complex(0, 1) * z) == 0.0);
  CHECK(oracle::max_diff(x * x, Complex2Matrix::identity()) == 0.0);
  const auto p = decompose(from_pauli(0.5, -1.0, 2.0, 0.25));
  CHECK(p.c0.real() == doctest::Approx(0.5));
  CHECK(p.cx.real() == doctest::Approx(-1.0));
  CHECK(p.cy.real() == doctest::Approx(2.0));
  CHECK(p.cz.real() == doctest::Approx(0.25));
  CHECK(from_pauli(0, 1, 2, 3).is_hermitian(0.0));
}

TEST_CASE("rotation axis must be a unit vector") {
  CHECK_THROWS_AS(RotationAxis::vector(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_NOTHROW(RotationAxis::vector(0.6, 0.8, 0.0));
}

TEST_CASE("unitary construction checks unitarity") {
  CHECK_THROWS_AS(Unitary2::from_matrix({1.0, 0.1, 0.0, 1.0}), std::invalid_argument);
  CHECK_NOTHROW(Unitary2::from_matrix(pauli::sigma_y()));
}

TEST_CASE("expm_hermitian rejects non-Hermitian input") {
  CHECK_THROWS_AS(expm_hermitian({0.0, 1.0, 0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("rotation group law over 1000 random angle pairs") {
  CounterRng rng(1, 0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = 20 * rng.uniform() - 10, b = 20 * rng.uniform() - 10;
    const double th = kPi * rng.uniform(), ph = kTwoPi * rng.uniform();
    const auto axis = RotationAxis::vector(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    const auto lhs = rotation_op(axis, a) * rotation_op(axis, b);
    worst = std::max(worst, oracle::max_diff(lhs.matrix(), rotation_op(axis, a + b).matrix()));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("rotation matches the exponential oracle") {
  const double a = 1.234;
  const auto r = rotation_y(a);
  const auto ref = oracle::expm_series(complex(0.5) * pauli::sigma_y(), a);
  CHECK(oracle::max_diff(r.matrix(), ref) < 1e-14);
}

TEST_CASE("expm_hermitian matches the Taylor oracle on 1000 Hermitian matrices") {
  CounterRng rng(2, 0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Complex2Matrix h = random_hermitian(rng, 1.0);
    // scale so that ‖H‖·t spans up to 10
    const double t = 10.0 * rng.uniform() / std::max(spectral_norm(h), 1e-12);
    worst = std::max(worst, oracle::max_diff(expm_hermitian(h, t).matrix(), oracle::expm_series(h, t)));
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("composition of 1e5 small rotations stays unitary") {
  CounterRng rng(3, 0);
  Unitary2 u;
  for (int i = 0; i < 100000; ++i) {
    const double th = kPi * rng.uniform(), ph = kTwoPi * rng.uniform();
    u = rotation_op(RotationAxis::vector(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)),
                    1e-3 * rng.normal()) *
        u;
  }
  CHECK(u.unitarity_error() <= 1e-10);

  PropagatorAccumulator acc;
  for (int i = 0; i < 100000; ++i) acc.apply(rotation_x(1e-3 * (1 + rng.uniform())));
  CHECK(acc.value().unitarity_error() <= 1e-10);
}

TEST_CASE("reunitarize restores a perturbed unitary") {
  CounterRng rng(4, 0);
  const Unitary2 u = random_unitary(rng);
  Complex2Matrix m = u.matrix();
  m(0, 0) *= 1.0 + 1e-9;
  m(1, 0) += 1e-9;
  const Unitary2 r = reunitarize(m);
  CHECK(r.unitarity_error() < 1e-15);
  CHECK(oracle::max_diff(r.matrix(), u.matrix()) < 1e-8);
}

TEST_CASE("fidelity") {
  CounterRng rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    const Unitary2 u = random_unitary(rng), v = random_unitary(rng);
    const double f = fidelity(u, v);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-15);
    const complex ph = std::polar(1.0, kTwoPi * rng.uniform());
    const Unitary2 up = Unitary2::from_matrix(ph * u.matrix());
    const Unitary2 vp = Unitary2::from_matrix(std::conj(ph) * v.matrix());
    CHECK(fidelity(up, v) == doctest::Approx(f).epsilon(1e-13));
    CHECK(fidelity(u, vp) == doctest::Approx(f).epsilon(1e-13));
    CHECK(infidelity(u, v) == doctest::Approx(1.0 - f).epsilon(1e-9));
  }
  CHECK(fidelity(rotation_z(0.3), rotation_z(0.3)) == doctest::Approx(1.0));
  // |Tr(σx)|/2 = 0
  CHECK(fidelity(rotation_x(kPi), Unitary2()) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("distance up to global phase matches the oracle") {
  CounterRng rng(6, 0);
  for (int i = 0; i < 200; ++i) {
    const Unitary2 u = random_unitary(rng), v = random_unitary(rng);
    CHECK(distance_up_to_global_phase(u, v) <= oracle::phase_distance(u.matrix(), v.matrix()) + 1e-12);
    const Unitary2 w = Unitary2::from_matrix(std::polar(1.0, 2.0) * u.matrix());
    CHECK(distance_up_to_global_phase(u, w) < 1e-14);
  }
}

TEST_CASE("spectral norm") {
  CHECK(spectral_norm(pauli::sigma_x()) == doctest::Approx(1.0));
  CHECK(spectral_norm({3.0, 0.0, 0.0, -5.0}) == doctest::Approx(5.0));
  // [[1,1],[0,1]] has largest singular value the golden ratio
  CHECK(spectral_norm({1.0, 1.0, 0.0, 1.0}) == doctest::Approx((1 + std::sqrt(5.0)) / 2));
}
