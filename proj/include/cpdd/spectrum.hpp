#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cpdd {

/// One-sided magnitude spectrum of a mean-removed real series, scaled so a
/// cosine of amplitude a at a bin centre shows up as a (2|X_k|/n interior,
/// |X_k|/n at DC and Nyquist).
struct Spectrum {
  std::vector<double> frequency;  ///< Hz
  std::vector<double> magnitude;
  double bin_width = 0.0;       ///< Hz
  std::size_t samples = 0;      ///< n of the transformed series
  std::size_t padded_length = 0;

  std::size_t size() const { return magnitude.size(); }
  /// Σ (x − x̄)² recovered from the bins (Parseval).
  double time_domain_energy() const;
  std::size_t peak_bin(std::size_t first = 1, std::size_t last = 0) const;
};

/// `padded_length` > n zero-pads for display; fits should use the default.
Spectrum power_spectrum(std::span<const double> samples, double sample_period,
                        std::size_t padded_length = 0);

}  // namespace cpdd
