#pragma once

#include <numbers>

namespace cpdd {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// NV electron gyromagnetic ratio, 2π × 28.03 MHz/mT, in rad/s/T.
inline constexpr double kGammaNV = kTwoPi * 28.03e9;

// Frequencies cross API boundaries either as plain Hz or as angular rad/s.
// These helpers make every conversion explicit.
constexpr double angular(double hz) { return kTwoPi * hz; }
constexpr double hertz(double rad_per_s) { return rad_per_s / kTwoPi; }

}  // namespace cpdd
