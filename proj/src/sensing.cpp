#include "cpdd/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cpdd/detail/evolve_kernel.hpp"
#include "cpdd/random.hpp"

namespace cpdd {

using detail::Su2;

double MeasurementModel::envelope(double t) const {
  if (!std::isfinite(t2)) return 1.0;
  return std::exp(-std::pow(t / t2, stretch));
}

double MeasurementModel::photon_contrast(double t) const { return (bright - dark) * envelope(t); }

void MeasurementModel::validate() const {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (0, 1]");
  if (!(dark >= 0.0 && dark < bright && bright <= 1.0))
    throw std::invalid_argument("need 0 <= b < a <= 1");
  if (!(t2 > 0.0)) throw std::invalid_argument("T2 must be > 0");
  if (!(stretch > 0.0)) throw std::invalid_argument("stretch exponent must be > 0");
  if (!(photons > 0.0)) throw std::invalid_argument("N_ph must be > 0");
  if (!(c_max >= 0.0)) throw std::invalid_argument("c_max must be >= 0");
}

BlochVector bloch_after(const Su2& u) {
  // U·(1, −i)/√2 with U = [[a, b], [−b*, a*]]
  const complex a(u.ar, u.ai);
  const complex b(u.br, u.bi);
  const complex i(0.0, 1.0);
  const complex p0 = (a - i * b) * std::sqrt(0.5);
  const complex p1 = (-std::conj(b) - i * std::conj(a)) * std::sqrt(0.5);
  const complex c = std::conj(p0) * p1;
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(p0) - std::norm(p1)};
}

double coherent_contrast(const Su2& block, Readout r) {
  const BlochVector v = bloch_after(block);
  return r == Readout::Slope ? v.x : -v.y;
}

double accumulated_angle(const Su2& block) {
  const BlochVector v = bloch_after(block);
  return std::atan2(v.x, -v.y);
}

double readout_population(const Su2& block, double readout_phase) {
  const Su2 w = detail::half_pi_pulse(readout_phase) * block * detail::half_pi_pulse(0.0);
  return w.ar * w.ar + w.ai * w.ai;
}

void ScanResult::validate() const {
  if (mean.size() != x.size() || stderr_.size() != x.size())
    throw std::logic_error("scan result arrays differ in length");
  for (double e : stderr_)
    if (!(e >= 0.0)) throw std::logic_error("negative standard error");
}

void ScanResult::write_csv(std::ostream& os) const {
  validate();
  os.precision(12);
  os << x_name << (x_unit.empty() ? "" : "_" + x_unit) << ',' << y_name << ",stderr\n";
  for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ',' << mean[i] << ',' << stderr_[i] << '\n';
}

void ScanResult::write_dat(std::ostream& os) const {
  validate();
  os.precision(12);
  os << "# " << x_name << ' ' << y_name << " stderr\n";
  for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ' ' << mean[i] << ' ' << stderr_[i] << '\n';
}

FrameChoice make_frame(FrameChoice::Kind kind, double larmor) {
  switch (kind) {
    case FrameChoice::Kind::RotatingRWA: return FrameChoice::rotating();
    case FrameChoice::Kind::Dressed: return FrameChoice::dressed(larmor);
    case FrameChoice::Kind::Lab: break;
  }
  throw std::invalid_argument("scans run in the rotating or dressed frame");
}

namespace {

double pick_substep(double requested, const FrameChoice& frame, std::span<const DriveSegment> segs,
                    const std::optional<SignalField>& signal) {
  return requested > 0.0 ? requested : default_substep(frame, segs, signal);
}

template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

double ramsey_wrapped_measurement(const SequenceSpec& block, const SignalField& signal,
                                  const NoiseParams& noise, Readout readout,
                                  const MeasurementModel& model, FrameChoice::Kind frame_kind,
                                  double substep) {
  const auto nominal = to_segments(block);
  const auto segs = apply_noise(nominal, noise.detuning, noise.amplitude_error);
  const FrameChoice frame = make_frame(frame_kind, signal.angular_frequency);
  const std::optional<SignalField> sig = signal;
  const auto r = detail::evolve_su2(frame, segs, sig, pick_substep(substep, frame, segs, sig), {});
  return model.c_max * model.envelope(block.total_duration()) * coherent_contrast(r.final, readout);
}

ScanResult time_scan(const TimeScanConfig& cfg, double amplitude_detuning) {
  cfg.model.validate();
  const double wl = cfg.signal.angular_frequency;
  const double rabi = wl - amplitude_detuning;
  if (!(rabi > 0.0)) throw std::invalid_argument("detuning leaves no drive (Omega <= 0)");
  std::vector<DriveSegment> segs;
  if (cfg.protocol == Protocol::CX) {
    segs = build_cx(rabi, cfg.window);
  } else if (cfg.protocol == Protocol::CXY8) {
    const double block = 8.0 * cfg.interval;
    const auto reps = static_cast<std::size_t>(std::llround(cfg.window / block));
    if (reps < 1 || std::abs(static_cast<double>(reps) * block - cfg.window) > 1e-9 * cfg.window)
      throw std::invalid_argument("time-scan window must be a whole number of CXY8 blocks");
    segs = to_segments(build_cxy8(rabi, cfg.interval, reps));
  } else {
    throw std::invalid_argument("time scans support CX and CXY8");
  }
  const auto steps = static_cast<std::size_t>(std::llround(cfg.window / cfg.sample_step));
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = cfg.sample_step * static_cast<double>(k);
  times.back() = std::min(times.back(), cfg.window);

  const FrameChoice frame = make_frame(cfg.frame, wl);
  const std::optional<SignalField> sig = cfg.signal;
  const auto r = detail::evolve_su2(frame, segs, sig, pick_substep(cfg.substep, frame, segs, sig), times);

  ScanResult out;
  out.x_name = "time";
  out.x_unit = "s";
  out.y_name = cfg.readout == Readout::Slope ? "slope_contrast" : "variance_contrast";
  out.x = times;
  out.mean.resize(times.size());
  out.stderr_.assign(times.size(), 0.0);
  for (std::size_t k = 0; k < times.size(); ++k)
    out.mean[k] = cfg.model.c_max * cfg.model.envelope(times[k]) * coherent_contrast(r.samples[k], cfg.readout);
  out.metadata = {{"protocol", to_string(cfg.protocol)},
                  {"amplitude_detuning_hz", fmt(hertz(amplitude_detuning))},
                  {"signal_hz", fmt(hertz(wl))},
                  {"g_hz", fmt(hertz(cfg.signal.amplitude))}};
  return out;
}

std::vector<ScanResult> time_scan(const TimeScanConfig& cfg, std::span<const double> detunings,
                                  Exec exec) {
  std::vector<ScanResult> out(detunings.size());
  for_each_index(detunings.size(), exec, [&](std::size_t i) { out[i] = time_scan(cfg, detunings[i]); });
  return out;
}

double trace_contrast(const ScanResult& trace) {
  if (trace.mean.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(trace.mean.begin(), trace.mean.end());
  return 0.5 * (*hi - *lo);
}

ScanResult contrast_vs_detuning(const TimeScanConfig& cfg, std::span<const double> detunings,
                                Exec exec) {
  const auto traces = time_scan(cfg, detunings, exec);
  ScanResult out;
  out.x_name = "amplitude_detuning";
  out.x_unit = "hz";
  out.y_name = "contrast";
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    out.x.push_back(hertz(detunings[i]));
    out.mean.push_back(trace_contrast(traces[i]));
    out.stderr_.push_back(0.0);
  }
  out.metadata = {{"protocol", to_string(cfg.protocol)}, {"window_s", fmt(cfg.window)}};
  return out;
}

double contrast_half_width(const ScanResult& contrast, double level) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < contrast.size(); ++i)
    if (contrast.x[i] >= 0.0) idx.push_back(i);
  if (idx.empty()) throw std::invalid_argument("contrast scan has no non-negative detunings");
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return contrast.x[a] < contrast.x[b]; });
  const double ref = contrast.mean[idx.front()];
  const double target = level * ref;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const double y1 = contrast.mean[idx[k]];
    if (y1 < target) {
      const double y0 = contrast.mean[idx[k - 1]];
      const double x0 = contrast.x[idx[k - 1]];
      const double x1 = contrast.x[idx[k]];
      return x0 + (y0 - target) / (y0 - y1) * (x1 - x0);
    }
  }
  return std::numeric_limits<double>::infinity();
}

namespace {

SequenceSpec frequency_point(const FrequencyScanConfig& cfg, double f_hz) {
  const double t = 0.5 / f_hz;
  if (cfg.protocol == Protocol::PulsedXY8) return build_xy8_pulsed(cfg.pulsed_rabi, t, cfg.repetitions);
  if (cfg.protocol == Protocol::CXY8) return build_cxy8(kPi / t, t, cfg.repetitions);
  if (cfg.protocol == Protocol::CXY4) return build_cxy4(kPi / t, t, cfg.repetitions);
  throw std::invalid_argument("frequency scans support CXY8, CXY4 and pulsed XY8");
}

}  // namespace

double resonant_amplitude_for_angle(const FrequencyScanConfig& cfg, double theta) {
  const double f = hertz(cfg.signal.angular_frequency);
  const SequenceSpec s = frequency_point(cfg, f);
  const double kappa = cfg.protocol == Protocol::PulsedXY8 ? 2.0 / kPi : 0.5;
  return theta / (2.0 * kappa * s.total_duration());
}

ScanResult frequency_scan(const FrequencyScanConfig& cfg, std::span<const double> freqs_hz, Exec exec) {
  cfg.model.validate();
  cfg.signal.validate();
  const FrameChoice::Kind frame =
      cfg.protocol == Protocol::PulsedXY8 ? FrameChoice::Kind::RotatingRWA : cfg.frame;
  ScanResult out;
  out.x_name = "frequency";
  out.x_unit = "hz";
  out.y_name = cfg.readout == Readout::Slope ? "slope_contrast" : "variance_contrast";
  out.x.assign(freqs_hz.begin(), freqs_hz.end());
  out.mean.assign(freqs_hz.size(), 0.0);
  out.stderr_.assign(freqs_hz.size(), 0.0);
  for_each_index(freqs_hz.size(), exec, [&](std::size_t i) {
    const SequenceSpec s = frequency_point(cfg, freqs_hz[i]);
    if (cfg.phase_average <= 1) {
      out.mean[i] = ramsey_wrapped_measurement(s, cfg.signal, NoiseParams{}, cfg.readout, cfg.model, frame,
                                               cfg.substep);
      return;
    }
    // equally spaced signal phases: the periodic trapezoid rule is spectrally accurate here
    double acc = 0.0;
    SignalField sig = cfg.signal;
    for (std::size_t k = 0; k < cfg.phase_average; ++k) {
      sig.phase = kTwoPi * static_cast<double>(k) / static_cast<double>(cfg.phase_average);
      acc += ramsey_wrapped_measurement(s, sig, NoiseParams{}, cfg.readout, cfg.model, frame, cfg.substep);
    }
    out.mean[i] = acc / static_cast<double>(cfg.phase_average);
  });
  out.metadata = {{"protocol", to_string(cfg.protocol)},
                  {"repetitions", std::to_string(cfg.repetitions)},
                  {"phase_average", std::to_string(cfg.phase_average)},
                  {"signal_hz", fmt(hertz(cfg.signal.angular_frequency))},
                  {"g_hz", fmt(hertz(cfg.signal.amplitude))}};
  return out;
}

double dip_fwhm(const ScanResult& scan) {
  if (scan.size() < 3) throw std::invalid_argument("dip width needs at least 3 points");
  const auto lo = static_cast<std::size_t>(std::min_element(scan.mean.begin(), scan.mean.end()) -
                                           scan.mean.begin());
  const double top = *std::max_element(scan.mean.begin(), scan.mean.end());
  const double half = 0.5 * (top + scan.mean[lo]);
  auto edge = [&](int dir) {
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(lo) + dir;
         i >= 0 && i < static_cast<std::ptrdiff_t>(scan.size()); i += dir) {
      const auto u = static_cast<std::size_t>(i);
      if (scan.mean[u] >= half) {
        const auto v = static_cast<std::size_t>(i - dir);
        const double frac = (half - scan.mean[v]) / (scan.mean[u] - scan.mean[v]);
        return scan.x[v] + frac * (scan.x[u] - scan.x[v]);
      }
    }
    throw std::runtime_error("dip does not recover to half depth inside the scan");
  };
  return std::abs(edge(1) - edge(-1));
}

namespace {

// Shared ensemble loop: per shot, one evolution sampled at every requested
// order; results reduced in shot order so serial and parallel agree bitwise.
template <class SignalFor>
ScanResult ensemble_scan(const OrderScanConfig& cfg, Exec exec, SignalFor&& signal_for) {
  cfg.model.validate();
  if (cfg.orders.empty()) throw std::invalid_argument("order scan needs at least one order");
  if (!std::is_sorted(cfg.orders.begin(), cfg.orders.end()) ||
      std::adjacent_find(cfg.orders.begin(), cfg.orders.end()) != cfg.orders.end() || cfg.orders.front() < 1)
    throw std::invalid_argument("orders must be strictly increasing and >= 1");
  if (cfg.shots < 2) throw std::invalid_argument("ensemble needs at least two shots");
  const SequenceSpec spec = build_cxy8(cfg.larmor, cfg.interval, cfg.orders.back());
  const auto segs = to_segments(spec);
  std::vector<double> times(cfg.orders.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    times[k] = spec.block_duration() * static_cast<double>(cfg.orders[k]);
  const FrameChoice frame = make_frame(cfg.frame, cfg.larmor);

  const std::size_t m = times.size();
  std::vector<double> table(cfg.shots * m);
  for_each_index(cfg.shots, exec, [&](std::size_t s) {
    CounterRng rng(cfg.seed, s);
    const std::optional<SignalField> sig = signal_for(rng);
    const auto r = detail::evolve_su2(frame, segs, sig, pick_substep(cfg.substep, frame, segs, sig), times);
    for (std::size_t k = 0; k < m; ++k) table[s * m + k] = coherent_contrast(r.samples[k], Readout::Variance);
  });

  ScanResult out;
  out.x_name = "time";
  out.x_unit = "s";
  out.y_name = "variance_contrast";
  out.x = times;
  out.mean.resize(m);
  out.stderr_.resize(m);
  const auto n = static_cast<double>(cfg.shots);
  for (std::size_t k = 0; k < m; ++k) {
    double sum = 0.0;
    for (std::size_t s = 0; s < cfg.shots; ++s) sum += table[s * m + k];
    const double mu = sum / n;
    double ss = 0.0;
    for (std::size_t s = 0; s < cfg.shots; ++s) {
      const double d = table[s * m + k] - mu;
      ss += d * d;
    }
    const double scale = cfg.model.c_max * cfg.model.envelope(times[k]);
    out.mean[k] = scale * mu;
    out.stderr_[k] = scale * std::sqrt(ss / (n - 1.0) / n);
  }
  out.metadata = {{"shots", std::to_string(cfg.shots)}, {"seed", std::to_string(cfg.seed)},
                  {"interval_s", fmt(cfg.interval)}};
  return out;
}

}  // namespace

ScanResult order_scan(const OrderScanConfig& cfg, Exec exec) {
  if (!(cfg.amplitude >= 0.0)) throw std::invalid_argument("signal amplitude must be >= 0");
  ScanResult out = ensemble_scan(cfg, exec, [&](CounterRng& rng) {
    return std::optional<SignalField>(SignalField{cfg.amplitude, cfg.larmor, kTwoPi * rng.uniform()});
  });
  out.metadata.emplace_back("g_hz", fmt(hertz(cfg.amplitude)));
  return out;
}

ScanResult gaussian_variance_scan(const OrderScanConfig& cfg, double b_rms, Exec exec) {
  if (!(b_rms >= 0.0)) throw std::invalid_argument("B_rms must be >= 0");
  ScanResult out = ensemble_scan(cfg, exec, [&](CounterRng& rng) {
    const double field = b_rms * rng.normal();
    // a negative amplitude is the same field with ξ = π
    return std::optional<SignalField>(
        SignalField{0.5 * cfg.model.gamma * std::abs(field), cfg.larmor, field < 0.0 ? kPi : 0.0});
  });
  out.metadata.emplace_back("b_rms_t", fmt(b_rms));
  return out;
}

ScanResult spurious_spectrum(const SpuriousConfig& cfg, std::span<const double> freqs_hz, Exec exec) {
  cfg.model.validate();
  if (cfg.randomized && cfg.runs < 1) throw std::invalid_argument("randomized spectrum needs runs >= 1");
  const double g = cfg.amplitude_over_rabi * cfg.larmor;
  const std::optional<SignalField> sig = SignalField{g, cfg.larmor, 0.0};
  const FrameChoice frame = FrameChoice::rotating();

  // block phases per run, shared by every scan point
  std::vector<std::vector<double>> run_phases;
  if (cfg.randomized) {
    const SequenceSpec proto = build_cxy4(cfg.larmor, kPi / cfg.larmor, cfg.blocks);
    for (std::size_t r = 0; r < cfg.runs; ++r)
      run_phases.push_back(randomize_global_phase(proto, CounterRng::mix(cfg.seed + r)).block_phases);
  }

  ScanResult out;
  out.x_name = "frequency";
  out.x_unit = "hz";
  out.y_name = "response";
  out.x.assign(freqs_hz.begin(), freqs_hz.end());
  out.mean.assign(freqs_hz.size(), 0.0);
  out.stderr_.assign(freqs_hz.size(), 0.0);
  for_each_index(freqs_hz.size(), exec, [&](std::size_t i) {
    const double t = 0.5 / freqs_hz[i];
    const SequenceSpec spec = build_cxy4(kPi / t, t, cfg.blocks);
    const auto segs = to_segments(spec);
    const auto ends = block_end_times(spec);
    const auto r = detail::evolve_su2(frame, segs, sig, pick_substep(cfg.substep, frame, segs, sig), ends);
    const double scale = cfg.model.c_max * cfg.model.envelope(spec.total_duration());
    if (!cfg.randomized) {
      out.mean[i] = 0.5 * (1.0 - scale * coherent_contrast(r.final, cfg.readout));
      return;
    }
    // U_block(φ + ψ) = R_z(ψ) U_block(φ) R_z(−ψ)
    std::vector<Su2> blocks(cfg.blocks);
    Su2 prev;
    for (std::size_t k = 0; k < cfg.blocks; ++k) {
      blocks[k] = r.samples[k] * prev.adjoint();
      prev = r.samples[k];
    }
    double sum = 0.0, ss = 0.0;
    for (std::size_t run = 0; run < cfg.runs; ++run) {
      Su2 u;
      for (std::size_t k = 0; k < cfg.blocks; ++k) {
        const double psi = run_phases[run][k];
        u = Su2::rot_z(psi) * blocks[k] * Su2::rot_z(-psi) * u;
      }
      const double resp = 0.5 * (1.0 - scale * coherent_contrast(u, cfg.readout));
      sum += resp;
      ss += resp * resp;
    }
    const auto n = static_cast<double>(cfg.runs);
    const double mu = sum / n;
    out.mean[i] = mu;
    out.stderr_[i] = n > 1.0 ? std::sqrt(std::max(0.0, (ss / n - mu * mu) / (n - 1.0))) : 0.0;
  });
  out.metadata = {{"protocol", cfg.randomized ? "CXY4R" : "CXY4"},
                  {"blocks", std::to_string(cfg.blocks)},
                  {"runs", std::to_string(cfg.randomized ? cfg.runs : 1)},
                  {"seed", std::to_string(cfg.seed)}};
  return out;
}

SpuriousSummary summarize_spurious(const ScanResult& spectrum, double larmor_hz,
                                   std::span<const double> features_hz, double half_window_hz,
                                   double exclusion_hz) {
  spectrum.validate();
  SpuriousSummary out;
  std::vector<double> base;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double f = spectrum.x[i];
    bool clear = std::abs(f - larmor_hz) > exclusion_hz;
    for (double c : features_hz) clear = clear && std::abs(f - c) > exclusion_hz;
    if (clear) base.push_back(spectrum.mean[i]);
  }
  if (base.size() < 2) throw std::invalid_argument("no baseline points outside the feature windows");
  const double n = static_cast<double>(base.size());
  out.baseline = std::accumulate(base.begin(), base.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : base) ss += (v - out.baseline) * (v - out.baseline);
  out.baseline_sd = std::sqrt(ss / n);
  for (double c : features_hz) {
    double acc = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < spectrum.size(); ++i)
      if (std::abs(spectrum.x[i] - c) <= half_window_hz) {
        acc += spectrum.mean[i];
        ++m;
      }
    if (m == 0) throw std::invalid_argument("no scan points inside a feature window");
    const double level = acc / static_cast<double>(m);
    out.features.push_back({c, level, out.baseline > 0.0 ? level / out.baseline : INFINITY});
  }
  return out;
}

double phase_accumulation_rate(const SequenceSpec& spec, const SignalField& signal,
                               FrameChoice::Kind frame_kind, double substep) {
  const auto segs = to_segments(spec);
  const auto ends = block_end_times(spec);
  const FrameChoice frame = make_frame(frame_kind, signal.angular_frequency);
  const std::optional<SignalField> sig = signal;
  const auto r = detail::evolve_su2(frame, segs, sig, pick_substep(substep, frame, segs, sig), ends);
  double prev = 0.0, offset = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    double theta = accumulated_angle(r.samples[k]) + offset;
    // unwrap
    while (theta - prev > kPi) { theta -= kTwoPi; offset -= kTwoPi; }
    while (theta - prev < -kPi) { theta += kTwoPi; offset += kTwoPi; }
    prev = theta;
    stt += ends[k] * ends[k];
    sty += ends[k] * theta;
  }
  return sty / stt;
}

}  // namespace cpdd
