#include "cpdd/su2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpdd {

Complex2Matrix Complex2Matrix::adjoint() const {
  return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
}

double Complex2Matrix::max_abs() const {
  double best = 0.0;
  for (const auto& v : m_) best = std::max(best, std::abs(v));
  return best;
}

bool Complex2Matrix::is_finite() const {
  return std::all_of(m_.begin(), m_.end(), [](complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

bool Complex2Matrix::is_hermitian(double tol) const {
  return (*this - adjoint()).max_abs() <= tol;
}

Complex2Matrix operator+(const Complex2Matrix& a, const Complex2Matrix& b) {
  return {a.m_[0] + b.m_[0], a.m_[1] + b.m_[1], a.m_[2] + b.m_[2], a.m_[3] + b.m_[3]};
}

Complex2Matrix operator-(const Complex2Matrix& a, const Complex2Matrix& b) {
  return {a.m_[0] - b.m_[0], a.m_[1] - b.m_[1], a.m_[2] - b.m_[2], a.m_[3] - b.m_[3]};
}

Complex2Matrix operator*(const Complex2Matrix& a, const Complex2Matrix& b) {
  const auto& x = a.m_;
  const auto& y = b.m_;
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
          x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

Complex2Matrix operator*(complex s, const Complex2Matrix& a) {
  return {s * a.m_[0], s * a.m_[1], s * a.m_[2], s * a.m_[3]};
}

PauliCoefficients decompose(const Complex2Matrix& m) {
  const complex i(0.0, 1.0);
  return {0.5 * (m(0, 0) + m(1, 1)), 0.5 * (m(0, 1) + m(1, 0)),
          0.5 * i * (m(0, 1) - m(1, 0)), 0.5 * (m(0, 0) - m(1, 1))};
}

Complex2Matrix from_pauli(double c0, double cx, double cy, double cz) {
  return {complex(c0 + cz, 0.0), complex(cx, -cy), complex(cx, cy), complex(c0 - cz, 0.0)};
}

RotationAxis RotationAxis::vector(double nx, double ny, double nz) {
  const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (!(std::abs(norm - 1.0) <= 1e-12)) {
    throw std::invalid_argument("rotation axis must be a unit vector (|n| = " +
                                std::to_string(norm) + ")");
  }
  return RotationAxis({nx, ny, nz});
}

Unitary2 Unitary2::from_matrix(const Complex2Matrix& m, double tol) {
  Unitary2 u(m);
  if (!m.is_finite() || u.unitarity_error() > tol) {
    throw std::invalid_argument("matrix is not unitary within tolerance");
  }
  return u;
}

double Unitary2::unitarity_error() const {
  return (m_.adjoint() * m_ - Complex2Matrix::identity()).max_abs();
}

Unitary2 rotation_op(const RotationAxis& axis, double angle) {
  if (!std::isfinite(angle)) throw std::invalid_argument("rotation angle must be finite");
  const auto& n = axis.direction();
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  // c·σ0 − i s (n·σ)
  return Unitary2::from_matrix_unchecked(
      {complex(c, -s * n[2]), complex(-s * n[1], -s * n[0]),
       complex(s * n[1], -s * n[0]), complex(c, s * n[2])});
}

Unitary2 expm_hermitian(const Complex2Matrix& h, double t) {
  if (!h.is_finite() || !h.is_hermitian(1e-12)) {
    throw std::invalid_argument("expm_hermitian: matrix is not Hermitian");
  }
  const auto p = decompose(h);
  const double c0 = p.c0.real();
  const double ax = p.cx.real();
  const double ay = p.cy.real();
  const double az = p.cz.real();
  const double norm = std::sqrt(ax * ax + ay * ay + az * az);
  const double theta = norm * t;
  const double c = std::cos(theta);
  // sin(|a|t)/|a| with its t → 0 limit
  const double s_over = norm > 0.0 ? std::sin(theta) / norm : t;
  const Complex2Matrix su{complex(c, -s_over * az), complex(-s_over * ay, -s_over * ax),
                          complex(s_over * ay, -s_over * ax), complex(c, s_over * az)};
  const complex phase = std::polar(1.0, -c0 * t);
  return Unitary2::from_matrix_unchecked(phase * su);
}

Unitary2 reunitarize(const Complex2Matrix& m) {
  complex a = m(0, 0);
  complex c = m(1, 0);
  const double norm = std::sqrt(std::norm(a) + std::norm(c));
  a /= norm;
  c /= norm;
  const complex det = m.determinant();
  const complex phase = std::abs(det) > 0.0 ? det / std::abs(det) : complex(1.0, 0.0);
  // Second column e^{iθ}(−c*, a*) keeps det = e^{iθ}.
  return Unitary2::from_matrix_unchecked(
      {a, -phase * std::conj(c), c, phase * std::conj(a)});
}

Unitary2 compose(const Unitary2& later, const Unitary2& earlier) {
  Unitary2 out(later.m_ * earlier.m_);
  if (out.unitarity_error() > 1e-12) return reunitarize(out.m_);
  return out;
}

void PropagatorAccumulator::apply(const Unitary2& step) {
  u_ = Unitary2::from_matrix_unchecked(step.matrix() * u_.matrix());
  if (++since_cleanup_ >= 1000) {
    u_ = reunitarize(u_.matrix());
    since_cleanup_ = 0;
  }
}

double fidelity(const Unitary2& u, const Unitary2& u0) {
  const complex tr = (u0.matrix().adjoint() * u.matrix()).trace();
  return std::min(1.0, 0.5 * std::abs(tr));
}

double infidelity(const Unitary2& u, const Unitary2& u0) {
  const Complex2Matrix w = u0.matrix().adjoint() * u.matrix();
  // Strip the U(1) part so w = [[a, b], [−b*, a*]] ∈ SU(2); then
  // F = |Re a| and 1 − F = (Im(a)² + |b|²)/(1 + F).
  const complex root = std::sqrt(w.determinant());
  const complex a = w(0, 0) / root;
  const complex b = w(0, 1) / root;
  const double f = std::min(1.0, std::abs(a.real()));
  return (a.imag() * a.imag() + std::norm(b)) / (1.0 + f);
}

double distance_up_to_global_phase(const Unitary2& u, const Unitary2& v) {
  const complex overlap = (v.matrix().adjoint() * u.matrix()).trace();
  const complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : complex(1.0);
  return (u.matrix() - phase * v.matrix()).max_abs();
}

double spectral_norm(const Complex2Matrix& m) {
  // Largest eigenvalue of the Hermitian M†M.
  const Complex2Matrix g = m.adjoint() * m;
  const double p = g(0, 0).real();
  const double q = g(1, 1).real();
  const double off = std::norm(g(0, 1));
  const double half_gap = std::sqrt(0.25 * (p - q) * (p - q) + off);
  return std::sqrt(std::max(0.0, 0.5 * (p + q) + half_gap));
}

}  // namespace cpdd
