#pragma once

// Qubit Hamiltonians in the lab, rotating (RWA) and dressed frames, and the
// time-ordered evolution of piecewise drives in the presence of an AC signal.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpdd/su2.hpp"

namespace cpdd {

/// Sensed AC field g·cos(ω_L t + ξ)σz.
struct SignalField {
  double amplitude = 0.0;          ///< g, rad/s
  double angular_frequency = 0.0;  ///< ω_L, rad/s
  double phase = 0.0;              ///< ξ, rad, in [0, 2π)

  /// g = γ_NV·B/2 for the |0⟩,|−1⟩ qubit.
  static SignalField from_magnetic_field(double tesla, double angular_frequency,
                                         double phase = 0.0);
  double magnetic_amplitude() const;  ///< B in tesla
  void validate() const;
};

/// One piece of drive with constant parameters.
struct DriveSegment {
  double duration = 0.0;          ///< s
  double rabi = 0.0;              ///< Ω, rad/s
  double phase = 0.0;             ///< φ, rad
  double carrier_detuning = 0.0;  ///< δ = ω − ω0, rad/s
};

class FrameChoice {
 public:
  enum class Kind { Lab, RotatingRWA, Dressed };

  /// Lab frame with Bohr frequency ω0 (> 0).
  static FrameChoice lab(double bohr_frequency);
  /// Frame rotating at the drive carrier, counter-rotating drive terms dropped.
  /// The signal keeps its full g·cos(ω_L t + ξ) time dependence.
  static FrameChoice rotating();
  /// Frame dressed by the drive and rotating at ω_L; static Hamiltonian
  /// −(Δ/2)σx + (g/2)(cos ξ σz − sin ξ σy) with Δ = ω_L − Ω. The carrier
  /// detuning δ averages out at this order and is not represented.
  /// ω_L comes from the signal when one is given.
  static FrameChoice dressed(std::optional<double> larmor = std::nullopt);

  Kind kind() const { return kind_; }
  double bohr_frequency() const { return frequency_.value_or(0.0); }
  std::optional<double> larmor() const { return frequency_; }

 private:
  FrameChoice(Kind k, std::optional<double> f) : kind_(k), frequency_(f) {}
  Kind kind_;
  std::optional<double> frequency_;
};

struct EvolutionResult {
  /// Propagator over the whole drive. Lab-frame runs report the lab
  /// propagator; rotating and dressed runs report the propagator in the
  /// frame rotating at the carrier, so populations are comparable across
  /// all three.
  Unitary2 final;
  std::vector<double> sample_times;
  std::vector<Unitary2> samples;
};

/// Raised when a requested substep cannot resolve the fastest oscillation.
class SubstepError : public std::invalid_argument {
 public:
  SubstepError(double requested, double bound);
  double requested() const { return requested_; }
  double bound() const { return bound_; }

 private:
  double requested_;
  double bound_;
};

Complex2Matrix hamiltonian_at(const FrameChoice& frame, const DriveSegment& segment,
                              const std::optional<SignalField>& signal, double t);

/// Largest admissible substep, 1/(50·f_max); +inf when nothing oscillates
/// (dressed frame, or a rotating frame without a signal).
double max_substep(const FrameChoice& frame, std::span<const DriveSegment> segments,
                   const std::optional<SignalField>& signal);

/// min(T/64, 1/(50·f_max)), T the shortest segment (floored at 1e-3 of
/// the longest so a short alignment piece does not dominate).
double default_substep(const FrameChoice& frame, std::span<const DriveSegment> segments,
                       const std::optional<SignalField>& signal);

/// Time-ordered product of midpoint-frozen exponentials, exact within each
/// substep. Every segment boundary and sample time is hit exactly.
/// Throws SubstepError when `substep` exceeds max_substep().
EvolutionResult evolve(const FrameChoice& frame, std::span<const DriveSegment> segments,
                       const std::optional<SignalField>& signal, double substep,
                       std::span<const double> sample_times = {});

/// exp(−i H₂ t) for the static dressed-frame Hamiltonian.
Unitary2 dressed_propagator_analytic(double g, double detuning, double xi, double t);

struct CommutatorNorm {
  double closed_form;  ///< |2 sin(ω_L t₁ + ξ) sin(Δφ/2) sin(Θ/2)|
  double numeric;      ///< spectral norm of the explicit commutator
};

/// Norm of [R_x(−ω_L t₁) R_z(−Δφ) R_x(ω_L t₁), U₂(t₁)] with the on-resonance
/// dressed propagator U₂ of accumulated angle Θ.
CommutatorNorm phase_change_commutator_norm(double larmor, double t1, double xi,
                                            double phase_jump, double theta);

/// Closed-form propagator of n (even) constant-phase intervals of length
/// π/ω_L on resonance with ξ = 0: (−1)^{n/2} R_z(2 Σ_k (φ_{2k} − φ_{2k−1})) R_z(Θ).
/// Throws std::invalid_argument for odd or zero n.
Unitary2 cpdd_ideal_propagator(std::span<const double> phases, double theta);

}  // namespace cpdd
