#include "cpdd/special_functions.hpp"

#include <cmath>
#include <stdexcept>

#include "cpdd/units.hpp"

namespace cpdd {

namespace {

constexpr double kSeriesLimit = 17.0;

// Σ (−x²/4)^k / (k!)², in long double so the cancellation around |x| ~ 17
// still leaves ~13 correct digits.
double j0_series(double x) {
  const long double q = -0.25L * static_cast<long double>(x) * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) + 1e-24L) break;
  }
  return static_cast<double>(sum);
}

// Hankel expansion, truncated at the smallest term. Q starts at −1/(8x).
double j0_asymptotic(double x) {
  const double z = 1.0 / (8.0 * x);
  double p = 0.0, q = 0.0;
  double term = 1.0;  // a_k (8x)^{-k}
  double prev = INFINITY;
  for (int k = 0; k < 60; ++k) {
    if (std::abs(term) >= prev) break;
    prev = std::abs(term);
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q -= term; break;
      case 2: p -= term; break;
      case 3: q += term; break;
    }
    if (prev < 1e-18) break;
    const double m = 2.0 * k + 1.0;
    term *= m * m * z / (k + 1.0);
  }
  const double chi = x - 0.25 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double x) {
  if (std::isnan(x)) return x;
  x = std::abs(x);
  if (x > 1e4) throw std::domain_error("bessel_j0 supports |x| <= 1e4");
  return x <= kSeriesLimit ? j0_series(x) : j0_asymptotic(x);
}

}  // namespace cpdd
