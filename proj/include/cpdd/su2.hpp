#pragma once

// Exact 2x2 complex linear algebra for single-qubit propagators.

#include <array>
#include <complex>
#include <cstddef>

namespace cpdd {

using complex = std::complex<double>;

/// Dense 2x2 complex matrix, row-major.
class Complex2Matrix {
 public:
  constexpr Complex2Matrix() = default;
  constexpr Complex2Matrix(complex a00, complex a01, complex a10, complex a11)
      : m_{a00, a01, a10, a11} {}

  static constexpr Complex2Matrix identity() { return {1.0, 0.0, 0.0, 1.0}; }

  constexpr complex operator()(std::size_t r, std::size_t c) const { return m_[2 * r + c]; }
  constexpr complex& operator()(std::size_t r, std::size_t c) { return m_[2 * r + c]; }

  Complex2Matrix adjoint() const;
  complex trace() const { return m_[0] + m_[3]; }
  complex determinant() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

  double max_abs() const;
  bool is_finite() const;
  bool is_hermitian(double tol) const;

  friend Complex2Matrix operator+(const Complex2Matrix& a, const Complex2Matrix& b);
  friend Complex2Matrix operator-(const Complex2Matrix& a, const Complex2Matrix& b);
  friend Complex2Matrix operator*(const Complex2Matrix& a, const Complex2Matrix& b);
  friend Complex2Matrix operator*(complex s, const Complex2Matrix& a);

 private:
  std::array<complex, 4> m_{};
};

namespace pauli {
inline constexpr Complex2Matrix sigma0() { return Complex2Matrix::identity(); }
inline constexpr Complex2Matrix sigma_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline constexpr Complex2Matrix sigma_y() { return {0.0, complex(0, -1), complex(0, 1), 0.0}; }
inline constexpr Complex2Matrix sigma_z() { return {1.0, 0.0, 0.0, -1.0}; }
}  // namespace pauli

/// Pauli-vector decomposition M = c0·σ0 + cx·σx + cy·σy + cz·σz.
struct PauliCoefficients {
  complex c0, cx, cy, cz;
};
PauliCoefficients decompose(const Complex2Matrix& m);
Complex2Matrix from_pauli(double c0, double cx, double cy, double cz);

/// Rotation generator direction: one of the Cartesian axes or a unit vector.
class RotationAxis {
 public:
  static RotationAxis x() { return RotationAxis({1.0, 0.0, 0.0}); }
  static RotationAxis y() { return RotationAxis({0.0, 1.0, 0.0}); }
  static RotationAxis z() { return RotationAxis({0.0, 0.0, 1.0}); }
  /// Throws std::invalid_argument unless |(nx, ny, nz)| = 1 within 1e-12.
  static RotationAxis vector(double nx, double ny, double nz);

  const std::array<double, 3>& direction() const { return n_; }

 private:
  explicit RotationAxis(std::array<double, 3> n) : n_(n) {}
  std::array<double, 3> n_;
};

/// A 2x2 unitary. Construction from an arbitrary matrix checks
/// ‖U†U − I‖_max ≤ 1e-10.
class Unitary2 {
 public:
  Unitary2() : m_(Complex2Matrix::identity()) {}

  static Unitary2 from_matrix(const Complex2Matrix& m, double tol = 1e-10);
  /// No unitarity check; for kernels that preserve unitarity by construction.
  static Unitary2 from_matrix_unchecked(const Complex2Matrix& m) { return Unitary2(m); }

  const Complex2Matrix& matrix() const { return m_; }
  complex operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  Unitary2 adjoint() const { return Unitary2(m_.adjoint()); }
  /// ‖U†U − I‖_max
  double unitarity_error() const;

  friend Unitary2 compose(const Unitary2& later, const Unitary2& earlier);

 private:
  explicit Unitary2(const Complex2Matrix& m) : m_(m) {}
  Complex2Matrix m_;
};

/// exp(−i·angle·(n̂·σ)/2)
Unitary2 rotation_op(const RotationAxis& axis, double angle);
inline Unitary2 rotation_x(double angle) { return rotation_op(RotationAxis::x(), angle); }
inline Unitary2 rotation_y(double angle) { return rotation_op(RotationAxis::y(), angle); }
inline Unitary2 rotation_z(double angle) { return rotation_op(RotationAxis::z(), angle); }

/// exp(−iHt) in closed form for Hermitian H = c·σ0 + a⃗·σ⃗.
/// Throws std::invalid_argument if H is not Hermitian within 1e-12.
Unitary2 expm_hermitian(const Complex2Matrix& h, double t);

/// later·earlier. Drift above 1e-12 is removed by re-unitarization.
Unitary2 compose(const Unitary2& later, const Unitary2& earlier);
inline Unitary2 operator*(const Unitary2& later, const Unitary2& earlier) {
  return compose(later, earlier);
}

/// Normalizes the first column and completes it orthogonally, keeping
/// the determinant phase.
Unitary2 reunitarize(const Complex2Matrix& m);

/// Running product U ← step·U with re-unitarization every 1000 steps.
class PropagatorAccumulator {
 public:
  void apply(const Unitary2& step);
  const Unitary2& value() const { return u_; }

 private:
  Unitary2 u_;
  std::size_t since_cleanup_ = 0;
};

/// |Tr(U0†U)|/2, in [0, 1].
double fidelity(const Unitary2& u, const Unitary2& u0);
/// 1 − fidelity, evaluated without the cancellation of 1 − |t|.
double infidelity(const Unitary2& u, const Unitary2& u0);

/// min over θ of ‖U − e^{iθ}V‖_max.
double distance_up_to_global_phase(const Unitary2& u, const Unitary2& v);

/// Largest singular value.
double spectral_norm(const Complex2Matrix& m);

}  // namespace cpdd
