#pragma once

namespace cpdd {

/// First zero of J₀.
inline constexpr double kBesselJ0FirstZero = 2.404825557695773;

/// Bessel function of the first kind, order zero, for |x| ≤ 1e4.
/// Absolute error below 1e-12 across that range.
double bessel_j0(double x);

}  // namespace cpdd
