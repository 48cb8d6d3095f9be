#pragma once

// SU(2) element in Cayley-Klein form [[a, b], [−b*, a*]], stored as four
// reals. Used by the time-stepping loops where std::complex arithmetic and
// general 2x2 products are measurably slower.

#include <cmath>

#include "cpdd/su2.hpp"

namespace cpdd::detail {

struct Su2 {
  double ar = 1.0, ai = 0.0, br = 0.0, bi = 0.0;

  /// exp(−i (hx σx + hy σy + hz σz) dt)
  static Su2 step(double hx, double hy, double hz, double dt) {
    const double norm = std::sqrt(hx * hx + hy * hy + hz * hz);
    if (norm == 0.0) return {};
    const double theta = norm * dt;
    const double c = std::cos(theta);
    const double s = std::sin(theta) / norm;
    return {c, -s * hz, -s * hy, -s * hx};
  }

  /// exp(−i angle σx / 2)
  static Su2 rot_x(double angle) {
    return {std::cos(0.5 * angle), 0.0, 0.0, -std::sin(0.5 * angle)};
  }
  static Su2 rot_y(double angle) {
    return {std::cos(0.5 * angle), 0.0, -std::sin(0.5 * angle), 0.0};
  }
  static Su2 rot_z(double angle) {
    return {std::cos(0.5 * angle), -std::sin(0.5 * angle), 0.0, 0.0};
  }

  friend Su2 operator*(const Su2& x, const Su2& y) {
    // a = a1 a2 − b1 b2*,  b = a1 b2 + b1 a2*
    return {x.ar * y.ar - x.ai * y.ai - (x.br * y.br + x.bi * y.bi),
            x.ar * y.ai + x.ai * y.ar - (x.bi * y.br - x.br * y.bi),
            x.ar * y.br - x.ai * y.bi + (x.br * y.ar + x.bi * y.ai),
            x.ar * y.bi + x.ai * y.br + (x.bi * y.ar - x.br * y.ai)};
  }

  Su2 adjoint() const { return {ar, -ai, -br, -bi}; }

  void renormalize() {
    const double n = std::sqrt(ar * ar + ai * ai + br * br + bi * bi);
    ar /= n;
    ai /= n;
    br /= n;
    bi /= n;
  }

  Unitary2 to_unitary() const {
    return Unitary2::from_matrix_unchecked(
        {complex(ar, ai), complex(br, bi), complex(-br, bi), complex(ar, -ai)});
  }

  /// Exact for SU(2) inputs; the U(1) part of a general unitary is dropped.
  static Su2 from_unitary(const Unitary2& u) {
    const complex root = std::sqrt(u.matrix().determinant());
    const complex a = u(0, 0) / root;
    const complex b = u(0, 1) / root;
    return {a.real(), a.imag(), b.real(), b.imag()};
  }
};

/// Ideal instantaneous π/2 rotation about the equatorial axis at `phase`.
inline Su2 half_pi_pulse(double phase) {
  const double c = std::sqrt(0.5);
  // c σ0 − i c (cos φ σx + sin φ σy)
  return {c, 0.0, -c * std::sin(phase), -c * std::cos(phase)};
}

}  // namespace cpdd::detail
