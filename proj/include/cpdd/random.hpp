#pragma once

#include <cmath>
#include <cstdint>

#include "cpdd/units.hpp"

namespace cpdd {

/// Counter-based random stream. Every draw is a pure function of
/// (seed, stream, counter), so work split across threads reproduces the
/// serial sequence exactly as long as each item owns its stream id.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  constexpr std::uint64_t next_u64() noexcept { return mix(key_ + kGolden * ++counter_); }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  constexpr double uniform_open_low() noexcept { return 1.0 - uniform(); }

  double normal() noexcept {
    // Box-Muller, one variate per call (the second is discarded so the
    // stream position stays a function of the call count alone).
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Poisson variate with the given mean drawn from `rng`.
/// Inversion for small means, transformed rejection (PTRS) otherwise.
std::uint32_t poisson(double mean, CounterRng& rng);

}  // namespace cpdd
