#include "cpdd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpdd/detail/evolve_kernel.hpp"
#include "cpdd/units.hpp"

namespace cpdd {

using detail::Su2;

SignalField SignalField::from_magnetic_field(double tesla, double angular_frequency,
                                             double phase) {
  SignalField s{0.5 * kGammaNV * tesla, angular_frequency, phase};
  s.validate();
  return s;
}

double SignalField::magnetic_amplitude() const { return 2.0 * amplitude / kGammaNV; }

void SignalField::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("signal amplitude must be finite and >= 0");
  if (!(angular_frequency > 0.0) || !std::isfinite(angular_frequency))
    throw std::invalid_argument("signal angular frequency must be > 0");
  if (!(phase >= 0.0 && phase < kTwoPi))
    throw std::invalid_argument("signal phase must lie in [0, 2pi)");
}

FrameChoice FrameChoice::lab(double bohr_frequency) {
  if (!(bohr_frequency > 0.0) || !std::isfinite(bohr_frequency))
    throw std::invalid_argument("lab frame needs a Bohr frequency > 0");
  return FrameChoice(Kind::Lab, bohr_frequency);
}

FrameChoice FrameChoice::rotating() { return FrameChoice(Kind::RotatingRWA, std::nullopt); }

FrameChoice FrameChoice::dressed(std::optional<double> larmor) {
  if (larmor && !(*larmor > 0.0)) throw std::invalid_argument("dressed frame needs omega_L > 0");
  return FrameChoice(Kind::Dressed, larmor);
}

namespace {

std::string describe_bound(double requested, double bound) {
  std::ostringstream os;
  os.precision(6);
  os << "substep " << requested << " s exceeds the admissible bound " << bound
     << " s (1/(50 f_max))";
  return os.str();
}

double dressed_larmor(const FrameChoice& frame, const std::optional<SignalField>& signal) {
  if (signal) {
    if (frame.larmor()) {
      const double a = *frame.larmor();
      const double b = signal->angular_frequency;
      if (std::abs(a - b) > 1e-12 * std::max(a, b))
        throw std::invalid_argument("dressed frame omega_L differs from the signal frequency");
    }
    return signal->angular_frequency;
  }
  if (!frame.larmor())
    throw std::invalid_argument("dressed frame needs omega_L from the frame or the signal");
  return *frame.larmor();
}

void validate_segments(std::span<const DriveSegment> segments) {
  for (const auto& s : segments) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration))
      throw std::invalid_argument("drive segment duration must be > 0");
    if (!(s.rabi >= 0.0) || !std::isfinite(s.rabi))
      throw std::invalid_argument("drive segment Rabi amplitude must be >= 0");
    if (!std::isfinite(s.phase) || !std::isfinite(s.carrier_detuning))
      throw std::invalid_argument("drive segment phase and detuning must be finite");
  }
}

// Static dressed-frame coefficients of −(Δ/2)σx + (g/2)(cos ξ σz − sin ξ σy).
struct Coeffs {
  double hx, hy, hz;
};

Coeffs dressed_coeffs(double g, double detuning, double xi) {
  return {-0.5 * detuning, -0.5 * g * std::sin(xi), 0.5 * g * std::cos(xi)};
}

// Propagator of one dressed piece [a, b] at drive phase φ, expressed in the
// carrier-rotating frame.
Su2 dressed_piece(double larmor, double g, double xi, const DriveSegment& seg, double a,
                  double b) {
  const Coeffs c = dressed_coeffs(g, larmor - seg.rabi, xi);
  const Su2 inner = Su2::step(c.hx, c.hy, c.hz, b - a);
  const Su2 core = Su2::rot_x(larmor * b) * inner * Su2::rot_x(-larmor * a);
  if (seg.phase == 0.0) return core;
  return Su2::rot_z(seg.phase) * core * Su2::rot_z(-seg.phase);
}

}  // namespace

SubstepError::SubstepError(double requested, double bound)
    : std::invalid_argument(describe_bound(requested, bound)),
      requested_(requested),
      bound_(bound) {}

Complex2Matrix hamiltonian_at(const FrameChoice& frame, const DriveSegment& segment,
                              const std::optional<SignalField>& signal, double t) {
  const double g = signal ? signal->amplitude : 0.0;
  const double wl = signal ? signal->angular_frequency : 0.0;
  const double xi = signal ? signal->phase : 0.0;
  const double field = signal ? g * std::cos(wl * t + xi) : 0.0;
  switch (frame.kind()) {
    case FrameChoice::Kind::Lab: {
      const double w0 = frame.bohr_frequency();
      const double carrier = w0 + segment.carrier_detuning;
      const double drive = segment.rabi * std::cos(carrier * t + segment.phase);
      return from_pauli(0.0, drive, 0.0, 0.5 * w0 + field);
    }
    case FrameChoice::Kind::RotatingRWA:
      return from_pauli(0.0, 0.5 * segment.rabi * std::cos(segment.phase),
                        0.5 * segment.rabi * std::sin(segment.phase),
                        -0.5 * segment.carrier_detuning + field);
    case FrameChoice::Kind::Dressed: {
      const double larmor = dressed_larmor(frame, signal);
      const Coeffs c = dressed_coeffs(g, larmor - segment.rabi, xi);
      return from_pauli(0.0, c.hx, c.hy, c.hz);
    }
  }
  return {};
}

double max_substep(const FrameChoice& frame, std::span<const DriveSegment> segments,
                   const std::optional<SignalField>& signal) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double w = 0.0;
  switch (frame.kind()) {
    case FrameChoice::Kind::Dressed:
      return inf;
    case FrameChoice::Kind::RotatingRWA:
      // piecewise constant without a signal
      if (!signal || signal->amplitude == 0.0) return inf;
      w = signal->angular_frequency;
      for (const auto& s : segments) w = std::max({w, s.rabi, std::abs(s.carrier_detuning)});
      break;
    case FrameChoice::Kind::Lab:
      w = frame.bohr_frequency();
      if (signal) w = std::max(w, signal->angular_frequency);
      for (const auto& s : segments)
        w = std::max({w, s.rabi, std::abs(frame.bohr_frequency() + s.carrier_detuning)});
      break;
  }
  if (w <= 0.0) return inf;
  return 1.0 / (50.0 * hertz(w));
}

double default_substep(const FrameChoice& frame, std::span<const DriveSegment> segments,
                       const std::optional<SignalField>& signal) {
  double longest = 0.0;
  for (const auto& s : segments) longest = std::max(longest, s.duration);
  double shortest = longest;
  for (const auto& s : segments)
    if (s.duration >= 1e-3 * longest) shortest = std::min(shortest, s.duration);
  const double bound = max_substep(frame, segments, signal);
  if (longest <= 0.0) return std::isfinite(bound) ? bound : 1.0;
  return std::min(shortest / 64.0, bound);
}

namespace detail {

Su2Evolution evolve_su2(const FrameChoice& frame, std::span<const DriveSegment> segments,
                        const std::optional<SignalField>& signal, double substep,
                        std::span<const double> sample_times) {
  validate_segments(segments);
  if (signal) signal->validate();
  if (!(substep > 0.0) || !std::isfinite(substep))
    throw std::invalid_argument("substep must be a positive finite time");
  const double bound = max_substep(frame, segments, signal);
  if (substep > bound * (1.0 + 1e-12)) throw SubstepError(substep, bound);

  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double t = sample_times[i];
    if (!(t >= 0.0) || t > total * (1.0 + 1e-12) + 1e-300)
      throw std::invalid_argument("sample time outside the drive window");
    if (i > 0 && !(t > sample_times[i - 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  }

  Su2Evolution out;
  out.samples.reserve(sample_times.size());
  std::size_t next_sample = 0;
  Su2 u;
  // leading samples at t = 0
  while (next_sample < sample_times.size() && sample_times[next_sample] <= 0.0) {
    out.samples.push_back(u);
    ++next_sample;
  }

  const bool dressed = frame.kind() == FrameChoice::Kind::Dressed;
  const double larmor = dressed ? dressed_larmor(frame, signal) : 0.0;
  const double g = signal ? signal->amplitude : 0.0;
  const double wl = signal ? signal->angular_frequency : 0.0;
  const double xi = signal ? signal->phase : 0.0;
  const bool lab = frame.kind() == FrameChoice::Kind::Lab;
  const double w0 = frame.bohr_frequency();

  std::size_t since_cleanup = 0;
  double seg_start = 0.0;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const DriveSegment& seg = segments[si];
    if (dressed && seg.rabi == 0.0)
      throw std::invalid_argument("dressed frame is undefined for undriven segments");
    const bool last = si + 1 == segments.size();
    const double seg_end = last ? total : seg_start + seg.duration;
    double a = seg_start;
    while (a < seg_end) {
      double b = seg_end;
      bool hits_sample = false;
      if (next_sample < sample_times.size() && sample_times[next_sample] < seg_end) {
        b = sample_times[next_sample];
        hits_sample = true;
      }
      if (b > a) {
        if (dressed) {
          u = dressed_piece(larmor, g, xi, seg, a, b) * u;
        } else {
          const double len = b - a;
          const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / substep)));
          const double dt = len / static_cast<double>(n);
          const double cphi = std::cos(seg.phase);
          const double sphi = std::sin(seg.phase);
          for (std::size_t k = 0; k < n; ++k) {
            const double tm = a + (static_cast<double>(k) + 0.5) * dt;
            const double field = g != 0.0 ? g * std::cos(wl * tm + xi) : 0.0;
            Su2 step;
            if (lab) {
              const double drive =
                  seg.rabi * std::cos((w0 + seg.carrier_detuning) * tm + seg.phase);
              step = Su2::step(drive, 0.0, 0.5 * w0 + field, dt);
            } else {
              step = Su2::step(0.5 * seg.rabi * cphi, 0.5 * seg.rabi * sphi,
                               -0.5 * seg.carrier_detuning + field, dt);
            }
            u = step * u;
            if (++since_cleanup >= 1000) {
              u.renormalize();
              since_cleanup = 0;
            }
          }
        }
      }
      a = b;
      if (hits_sample || (next_sample < sample_times.size() && sample_times[next_sample] <= b)) {
        while (next_sample < sample_times.size() && sample_times[next_sample] <= b) {
          out.samples.push_back(u);
          ++next_sample;
        }
      }
    }
    seg_start = seg_end;
  }
  // samples at (or a rounding hair beyond) the end
  while (next_sample < sample_times.size()) {
    out.samples.push_back(u);
    ++next_sample;
  }
  u.renormalize();
  out.final = u;
  return out;
}

}  // namespace detail

EvolutionResult evolve(const FrameChoice& frame, std::span<const DriveSegment> segments,
                       const std::optional<SignalField>& signal, double substep,
                       std::span<const double> sample_times) {
  const auto raw = detail::evolve_su2(frame, segments, signal, substep, sample_times);
  EvolutionResult out;
  out.final = raw.final.to_unitary();
  out.sample_times.assign(sample_times.begin(), sample_times.end());
  out.samples.reserve(raw.samples.size());
  for (const auto& s : raw.samples) out.samples.push_back(s.to_unitary());
  return out;
}

Unitary2 dressed_propagator_analytic(double g, double detuning, double xi, double t) {
  const Coeffs c = dressed_coeffs(g, detuning, xi);
  return Su2::step(c.hx, c.hy, c.hz, t).to_unitary();
}

CommutatorNorm phase_change_commutator_norm(double larmor, double t1, double xi,
                                            double phase_jump, double theta) {
  const double closed = std::abs(2.0 * std::sin(larmor * t1 + xi) * std::sin(0.5 * phase_jump) *
                                 std::sin(0.5 * theta));
  const Unitary2 jump =
      rotation_x(-larmor * t1) * rotation_z(-phase_jump) * rotation_x(larmor * t1);
  // on-resonance dressed propagator with accumulated angle Θ
  const Unitary2 u2 = rotation_x(xi) * rotation_z(theta) * rotation_x(-xi);
  const Complex2Matrix comm =
      jump.matrix() * u2.matrix() - u2.matrix() * jump.matrix();
  return {closed, spectral_norm(comm)};
}

Unitary2 cpdd_ideal_propagator(std::span<const double> phases, double theta) {
  const std::size_t n = phases.size();
  if (n == 0 || n % 2 != 0)
    throw std::invalid_argument("closed-form CPDD propagator needs an even, nonzero interval count");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < n; k += 2) sum += phases[k + 1] - phases[k];
  const Unitary2 core = rotation_z(2.0 * sum) * rotation_z(theta);
  if ((n / 2) % 2 == 0) return core;
  return Unitary2::from_matrix_unchecked(complex(-1.0, 0.0) * core.matrix());
}

}  // namespace cpdd
