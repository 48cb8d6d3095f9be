#include "cpdd/validation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "cpdd/dynamics.hpp"
#include "cpdd/noise.hpp"
#include "cpdd/qdyne.hpp"
#include "cpdd/random.hpp"
#include "cpdd/sequences.hpp"
#include "cpdd/spectrum.hpp"
#include "cpdd/units.hpp"

namespace cpdd {

namespace {

ValidationCheck check(std::string name, double value, double expected, double tol) {
  return {std::move(name), value, expected, tol, std::abs(value - expected) <= tol};
}

double slope(double x0, double y0, double x1, double y1) {
  return std::log(y1 / y0) / std::log(x1 / x0);
}

}  // namespace

std::vector<ValidationCheck> run_validation() {
  std::vector<ValidationCheck> out;
  const double wl = angular(8e6);
  const double T = kPi / wl;

  // numeric dressed evolution vs the ideal CPDD propagator, random phases
  {
    CounterRng rng(7, 0);
    std::vector<double> phases(16);
    for (double& p : phases) p = kTwoPi * rng.uniform();
    std::vector<DriveSegment> segs;
    for (double p : phases) segs.push_back({T, wl, p, 0.0});
    const double g = angular(20e3);
    const auto r = evolve(FrameChoice::dressed(wl), segs, SignalField{g, wl, 0.0}, T / 8);
    const double theta = g * T * static_cast<double>(phases.size());
    out.push_back(check("cpdd propagator: numeric vs closed form",
                        distance_up_to_global_phase(r.final, cpdd_ideal_propagator(phases, theta)), 0.0,
                        1e-8));
  }

  // static dressed Hamiltonian: analytic exponential vs stepped evolution
  {
    const double g = angular(50e3), d = angular(30e3), xi = 0.7, t = 3e-6;
    const DriveSegment seg{t, wl - d, 0.0, 0.0};
    const auto r = evolve(FrameChoice::dressed(wl), std::span(&seg, 1), SignalField{g, wl, xi}, t);
    const Unitary2 u = rotation_x(wl * t) * dressed_propagator_analytic(g, d, xi, t);
    out.push_back(check("dressed propagator: analytic vs numeric", distance_up_to_global_phase(r.final, u),
                        0.0, 1e-9));
  }

  // fidelity orders of the constant-phase and XY8-phased products
  {
    auto infid = [](double eps, bool xy8) {
      const PulseError e{eps, 0.0, 0.0};
      const std::vector<double> zero(8, 0.0);
      const auto ph = xy8 ? phase_tables::xy8() : zero;
      return infidelity(phased_product(e, ph), phased_product(PulseError{}, ph));
    };
    out.push_back(check("fidelity order, constant phase", slope(1e-4, infid(1e-4, false), 1e-2, infid(1e-2, false)),
                        1.0, 0.1));
    out.push_back(check("fidelity order, XY8 phases", slope(1e-4, infid(1e-4, true), 1e-2, infid(1e-2, true)), 3.0,
                        0.1));
    const double e = 1e-3;
    out.push_back(check("zero-phase expansion at eps=1e-3", infid(e, false),
                        1.0 - fidelity_zero8_analytic(e, 0.0), 200 * e * e));
  }

  // amplitude error 5% of omega_L over one interval
  out.push_back(check("pulse error eps at Delta = 0.05 omega_L",
                      pulse_error_from_noise(0.95 * wl, wl, 0.0).epsilon, 0.00616, 1e-5));

  // phase-change commutator
  {
    double worst = 0.0;
    CounterRng rng(11, 0);
    for (int i = 0; i < 50; ++i) {
      const auto c = phase_change_commutator_norm(wl, T * rng.uniform(), kTwoPi * rng.uniform(),
                                                  kTwoPi * rng.uniform(), kTwoPi * rng.uniform());
      worst = std::max(worst, std::abs(c.closed_form - c.numeric));
    }
    out.push_back(check("phase-jump commutator: closed form vs matrix", worst, 0.0, 1e-12));
  }

  // RWA vs lab frame at omega_0 = 100 Omega
  {
    const double rabi = angular(1e6), w0 = 100.0 * rabi, t = kPi / rabi;
    const DriveSegment seg{t, rabi, 0.3, 0.0};
    const auto rwa = evolve(FrameChoice::rotating(), std::span(&seg, 1), std::nullopt, t / 64);
    const auto lab = evolve(FrameChoice::lab(w0), std::span(&seg, 1), std::nullopt,
                            default_substep(FrameChoice::lab(w0), std::span(&seg, 1), std::nullopt));
    const double p_rwa = std::norm(rwa.final(1, 0));
    const double p_lab = std::norm(lab.final(1, 0));
    out.push_back(check("rotating-wave vs lab population, omega0 = 100 Omega", p_lab, p_rwa, 0.02));
  }

  // long composition keeps unitarity
  {
    const auto seq = build_cxy8(wl, T, 20000);
    const Unitary2 u = sequence_propagator(seq, angular(10e3), angular(50e3));
    const auto m = u.matrix();
    const double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    out.push_back(check("unitarity after 160000 segments", std::abs(det - 1.0), 0.0, 1e-12));
  }

  // Parseval on a noisy sinusoid
  {
    CounterRng rng(3, 0);
    std::vector<double> x(4096);
    double mean = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = std::cos(0.37 * static_cast<double>(k)) + rng.normal();
      mean += x[k];
    }
    mean /= static_cast<double>(x.size());
    double energy = 0.0;
    for (double v : x) energy += (v - mean) * (v - mean);
    const Spectrum s = power_spectrum(x, 1e-3);
    out.push_back(check("Parseval energy ratio", s.time_domain_energy() / energy, 1.0, 1e-10));
  }

  // shot-noise sensitivity at 5 us
  {
    MeasurementModel m;
    m.t2 = 250e-6;
    m.dark = 0.68;
    m.photons = 0.164;
    out.push_back(check("eta(5 us), nT/sqrt(Hz)", 1e9 * sensitivity_shot_noise(m, 5e-6, 3.646e-6), 105.0, 2.0));
    const double topt = optimal_sensing_time(250e-6, 3.646e-6);
    out.push_back(check("optimal sensing time, us", 1e6 * topt, 128.45, 0.01));
    out.push_back(check("eta at optimum, nT/sqrt(Hz)", 1e9 * sensitivity_shot_noise(m, topt, 3.646e-6), 26.0, 1.0));
  }
  return out;
}

void print_validation_table(const std::vector<ValidationCheck>& checks, std::ostream& os) {
  std::size_t width = 10;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << "check" << "  result  value            expected         tol\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << (c.passed ? "PASS  " : "FAIL  ")
       << "  " << std::setw(15) << std::setprecision(8) << c.value << "  " << std::setw(15) << c.expected << "  "
       << std::setprecision(3) << c.tolerance << '\n';
  }
}

}  // namespace cpdd
