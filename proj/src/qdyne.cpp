#include "cpdd/qdyne.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "cpdd/detail/evolve_kernel.hpp"
#include "cpdd/random.hpp"
#include "cpdd/spectrum.hpp"

namespace cpdd {

namespace {

constexpr std::size_t kMinTraceLength = std::size_t{1} << 16;
constexpr std::array<char, 8> kMagic = {'C', 'P', 'D', 'D', 'Q', 'T', 'R', '1'};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const QdyneConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17) << c.schedule.sequence_duration << ' ' << c.schedule.overhead << ' '
     << c.schedule.period << ' ' << c.schedule.measurements << ' ' << c.signal_hz << ' '
     << c.amplitude << ' ' << c.xi0 << ' ' << c.model.kappa << ' ' << c.model.c_max << ' '
     << c.model.bright << ' ' << c.model.dark << ' ' << c.model.t2 << ' ' << c.model.stretch << ' '
     << c.model.photons << ' ' << to_string(c.sequence.protocol) << ' ' << c.sequence.interval << ' '
     << c.sequence.repetitions << ' ' << c.sequence.rabi;
  for (double p : c.sequence.phase_table) os << ' ' << p;
  return fnv1a(os.str());
}

template <class Fn>
void parallel_for(std::size_t n, Exec exec, Fn&& fn) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  }
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

void QdyneConfig::validate() const {
  schedule.validate();
  sequence.validate();
  model.validate();
  if (!(signal_hz > 0.0)) throw std::invalid_argument("signal frequency must be > 0");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("signal amplitude must be >= 0");
  if (!(prior_hz > 0.0)) throw std::invalid_argument("prior frequency must be > 0");
}

QdyneConfig reference_qdyne_config(std::uint64_t measurements) {
  QdyneConfig c;
  const double interval = 62.5e-9;
  c.sequence = build_cxy8(kPi / interval, interval, 10);
  c.schedule = build_qdyne_schedule(c.sequence, 3.646e-6, measurements);
  c.model.t2 = 250e-6;
  c.model.stretch = 1.0;
  c.model.bright = 1.0;
  c.model.dark = 0.68;
  c.model.photons = 0.164;
  return c;
}

double qdyne_phase(const QdyneConfig& cfg, std::uint64_t k) {
  const double xi = cfg.schedule.signal_phase(k, cfg.signal_hz, cfg.xi0);
  return 2.0 * cfg.model.kappa * cfg.amplitude * cfg.schedule.sequence_duration * std::cos(xi);
}

// Modulation depth (a − b)/(a + b) keeps the rate positive with mean N_ph.
double qdyne_rate(const QdyneConfig& cfg, double coherent) {
  const MeasurementModel& m = cfg.model;
  const double depth = m.c_max * (m.bright - m.dark) / (m.bright + m.dark) *
                       m.envelope(cfg.schedule.sequence_duration);
  return m.photons * (1.0 + depth * coherent);
}

std::vector<double> expected_rates(const QdyneConfig& cfg, std::uint64_t first, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = qdyne_rate(cfg, std::sin(qdyne_phase(cfg, first + i)));
  return out;
}

std::vector<double> expected_rates_unitary(const QdyneConfig& cfg, std::uint64_t first, std::size_t n,
                                           FrameChoice::Kind frame_kind, Exec exec) {
  cfg.validate();
  const auto segs = to_segments(cfg.sequence);
  const double wl = kTwoPi * cfg.signal_hz;
  const FrameChoice frame = make_frame(frame_kind, wl);
  const std::optional<SignalField> probe = SignalField{cfg.amplitude, wl, 0.0};
  const double substep = default_substep(frame, segs, probe);
  std::vector<double> out(n);
  parallel_for(n, exec, [&](std::size_t i) {
    const std::optional<SignalField> sig =
        SignalField{cfg.amplitude, wl, cfg.schedule.signal_phase(first + i, cfg.signal_hz, cfg.xi0)};
    const auto r = detail::evolve_su2(frame, segs, sig, substep, {});
    out[i] = qdyne_rate(cfg, coherent_contrast(r.final, Readout::Slope));
  });
  return out;
}

QdyneTrace simulate_trace(const QdyneConfig& cfg, Exec exec) {
  cfg.validate();
  QdyneTrace t;
  t.period = cfg.schedule.period;
  t.seed = cfg.seed;
  t.config_hash = config_hash(cfg);
  t.counts.resize(cfg.schedule.measurements);
  parallel_for(t.counts.size(), exec, [&](std::size_t k) {
    CounterRng rng(cfg.seed, k);
    t.counts[k] = poisson(qdyne_rate(cfg, std::sin(qdyne_phase(cfg, k))), rng);
  });
  return t;
}

Unfolded unfold_frequency(double beat_hz, double period, double prior_hz) {
  if (!(period > 0.0)) throw std::invalid_argument("period must be > 0");
  const double fs = 1.0 / period;
  const auto m0 = static_cast<long long>(std::llround(prior_hz * period));
  struct Cand {
    double nu, lo;
    int sign;
  };
  std::vector<Cand> cands;
  for (long long m = m0 - 1; m <= m0 + 1; ++m) {
    const double lo = static_cast<double>(m) * fs;
    cands.push_back({lo + beat_hz, lo, +1});
    cands.push_back({lo - beat_hz, lo, -1});
  }
  std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    return std::abs(a.nu - prior_hz) < std::abs(b.nu - prior_hz);
  });
  const Cand& best = cands[0];
  // the prior must sit clearly closer to one alias than to its neighbour
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double d = std::abs(cands[i].nu - best.nu);
    if (d > 0.0) gap = std::min(gap, d);
  }
  const bool ambiguous = std::abs(best.nu - prior_hz) > 0.45 * gap;
  return {best.nu, best.lo, best.sign, ambiguous};
}

QdyneAnalysis analyze_series(std::span<const double> samples, double period, double prior_hz,
                             const QdyneAnalysisOptions& opt) {
  if (samples.size() < 64) throw std::invalid_argument("trace too short to analyze");
  if (opt.padding < 1) throw std::invalid_argument("padding factor must be >= 1");
  const std::size_t pad = opt.padding;
  const Spectrum s = power_spectrum(samples, period, pad * samples.size());
  std::size_t first = 1, last = 0;
  if (opt.search_bins > 0) {
    const auto c = static_cast<std::size_t>(std::llround(opt.center_hint_hz / s.bin_width));
    const std::size_t r = opt.search_bins * pad;
    first = c > r ? c - r : 1;
    last = std::min(s.size() - 1, c + r);
    if (first > last) throw std::invalid_argument("peak search range outside the spectrum");
  }
  QdyneAnalysis a;
  a.bin_width_hz = s.bin_width;
  a.peak_bin = s.peak_bin(first, last);
  // white shot noise: the floor is the same everywhere, so take it from the
  // whole spectrum (one bin per natural spacing) where peaks are a negligible fraction
  std::vector<double> independent;
  independent.reserve(s.size() / pad + 1);
  for (std::size_t i = pad; i < s.size(); i += pad) independent.push_back(s.magnitude[i]);
  LorentzianOptions lo;
  lo.noise_floor = robust_sd(independent);
  a.fit = fit_lorentzian_bins(s, a.peak_bin, opt.window_bins * pad, lo);
  // noise magnitudes are Rayleigh with scale median/√(2 ln 2); over n searched
  // bins the largest exceeds scale·√(2 ln(n/p)) with probability ≈ p
  const auto mid = independent.begin() + static_cast<std::ptrdiff_t>(independent.size() / 2);
  std::nth_element(independent.begin(), mid, independent.end());
  const double scale = *mid / std::sqrt(2.0 * std::log(2.0));
  const double searched = std::max(1.0, static_cast<double>((last ? last : s.size() - 1) - first + 1) /
                                            static_cast<double>(pad));
  a.false_alarm_level = scale * std::sqrt(2.0 * std::log(std::max(searched / opt.false_alarm, 1.0)));
  // padded bins are correlated over roughly `pad` neighbours
  for (double& e : a.fit.stderrs) e *= std::sqrt(static_cast<double>(pad));
  a.beat_hz = a.fit.value("nu0");
  a.beat_err_hz = a.fit.error("nu0");
  a.linewidth_hz = 2.0 * a.fit.value("sigma");
  a.snr = a.fit.snr.value_or(0.0);
  a.detected = a.fit.converged && a.snr >= opt.snr_threshold && s.magnitude[a.peak_bin] >= a.false_alarm_level;
  const Unfolded u = unfold_frequency(a.beat_hz, period, prior_hz);
  a.nu0_hz = u.nu0_hz;
  a.lo_hz = u.lo_hz;
  a.sign = u.sign;
  a.ambiguous = u.ambiguous;
  a.nu0_err_hz = a.beat_err_hz;
  return a;
}

QdyneAnalysis analyze_trace(const QdyneTrace& trace, double prior_hz, const QdyneAnalysisOptions& opt) {
  if (trace.counts.size() < kMinTraceLength)
    throw std::invalid_argument("trace needs at least 65536 samples");
  std::vector<double> x(trace.counts.begin(), trace.counts.end());
  return analyze_series(x, trace.period, prior_hz, opt);
}

std::string QdyneAnalysis::to_json() const {
  nlohmann::ordered_json j;
  j["nu0_hz"] = nu0_hz;
  j["nu0_err_hz"] = nu0_err_hz;
  j["beat_hz"] = beat_hz;
  j["beat_err_hz"] = beat_err_hz;
  j["lo_hz"] = lo_hz;
  j["sign"] = sign;
  j["linewidth_hz"] = linewidth_hz;
  j["sigma_hz"] = 0.5 * linewidth_hz;
  j["snr"] = snr;
  j["bin_width_hz"] = bin_width_hz;
  j["false_alarm_level"] = false_alarm_level;
  j["detected"] = detected;
  j["ambiguous"] = ambiguous;
  j["fit"] = nlohmann::ordered_json::parse(fit.to_json());
  return j.dump(2);
}

ScalingAnalysis scaling_analysis(const QdyneTrace& trace, std::span<const std::size_t> slice_lengths,
                                 double prior_hz, Exec exec) {
  if (slice_lengths.size() < 4) throw std::invalid_argument("scaling needs at least 4 slice lengths");
  const auto [mn, mx] = std::minmax_element(slice_lengths.begin(), slice_lengths.end());
  if (*mn < kMinTraceLength) throw std::invalid_argument("slices must hold at least 65536 samples");
  if (*mx > trace.counts.size()) throw std::invalid_argument("slice longer than the trace");
  if (std::log10(static_cast<double>(*mx) / static_cast<double>(*mn)) < 1.5)
    throw std::invalid_argument("slice lengths must span at least 1.5 decades");

  // locate the beat on the longest slice so short, noisy slices search near it
  std::vector<double> all(trace.counts.begin(), trace.counts.end());
  const QdyneAnalysis ref =
      analyze_series(std::span<const double>(all).first(*mx), trace.period, prior_hz);

  ScalingAnalysis out;
  for (std::size_t len : slice_lengths) {
    const std::size_t n = trace.counts.size() / len;
    std::vector<QdyneAnalysis> parts(n);
    QdyneAnalysisOptions opt;
    opt.center_hint_hz = ref.beat_hz;
    opt.search_bins = 3;
    parallel_for(n, exec, [&](std::size_t i) {
      parts[i] = analyze_series(std::span<const double>(all).subspan(i * len, len), trace.period,
                                prior_hz, opt);
    });
    ScalingRow row;
    row.total_time = trace.period * static_cast<double>(len);
    row.slices = n;
    for (const auto& p : parts) {
      row.linewidth_hz += p.linewidth_hz;
      row.nu0_err_hz += p.nu0_err_hz;
      row.snr += p.snr;
    }
    row.linewidth_hz /= static_cast<double>(n);
    row.nu0_err_hz /= static_cast<double>(n);
    row.snr /= static_cast<double>(n);
    out.rows.push_back(row);
  }
  std::vector<double> t, lw, err, snr;
  for (const auto& r : out.rows) {
    t.push_back(r.total_time);
    lw.push_back(r.linewidth_hz);
    err.push_back(r.nu0_err_hz);
    snr.push_back(r.snr);
  }
  out.linewidth_slope = log_slope(t, lw);
  out.nu0_err_slope = log_slope(t, err);
  out.snr_slope = log_slope(t, snr);
  return out;
}

double sensitivity_shot_noise(const MeasurementModel& model, double t, double overhead) {
  if (!(t > 0.0)) throw std::invalid_argument("sensing time must be > 0");
  if (!(overhead >= 0.0)) throw std::invalid_argument("overhead must be >= 0");
  const double c = model.photon_contrast(t);
  return 2.0 / (model.gamma * model.kappa * c) * std::sqrt(t + overhead) / (std::sqrt(model.photons) * t);
}

double optimal_sensing_time(double t2, double overhead) {
  if (!(t2 > 0.0) || !std::isfinite(t2)) throw std::invalid_argument("T2 must be finite and > 0");
  if (!(overhead >= 0.0)) throw std::invalid_argument("overhead must be >= 0");
  const double t =
      0.5 * (0.5 * t2 - overhead + std::sqrt(0.25 * t2 * t2 + 3.0 * t2 * overhead + overhead * overhead));
  MeasurementModel m;
  m.t2 = t2;
  m.stretch = 1.0;
  const double h = 1e-4 * t;
  const double e0 = sensitivity_shot_noise(m, t, overhead);
  if (!(sensitivity_shot_noise(m, t - h, overhead) > e0 && sensitivity_shot_noise(m, t + h, overhead) > e0))
    throw std::logic_error("optimal sensing time is not a local minimum");
  return t;
}

FitSensitivity sensitivity_from_fit(double nu0_err_hz, double snr, double b0_tesla, double total_time) {
  if (!(total_time > 0.0)) throw std::invalid_argument("total time must be > 0");
  if (!(snr > 0.0)) throw std::invalid_argument("SNR must be > 0");
  return {nu0_err_hz * std::pow(total_time, 1.5), b0_tesla / snr * std::sqrt(total_time)};
}

void write_trace_csv(const QdyneTrace& trace, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << std::setprecision(17);
  os << "# period_s=" << trace.period << '\n'
     << "# seed=" << trace.seed << '\n'
     << "# config_hash=" << trace.config_hash << '\n'
     << "# measurements=" << trace.counts.size() << '\n'
     << "# total_time_s=" << trace.total_time() << '\n';
  for (auto c : trace.counts) os << c << '\n';
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

void write_trace_binary(const QdyneTrace& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  const std::uint64_t n = trace.counts.size();
  os.write(kMagic.data(), kMagic.size());
  os.write(reinterpret_cast<const char*>(&trace.period), sizeof(double));
  os.write(reinterpret_cast<const char*>(&trace.seed), sizeof(std::uint64_t));
  os.write(reinterpret_cast<const char*>(&trace.config_hash), sizeof(std::uint64_t));
  os.write(reinterpret_cast<const char*>(&n), sizeof(std::uint64_t));
  os.write(reinterpret_cast<const char*>(trace.counts.data()),
           static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

QdyneTrace read_trace(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 8> head{};
  is.read(head.data(), head.size());
  QdyneTrace t;
  if (is.gcount() == 8 && head == kMagic) {
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&t.period), sizeof(double));
    is.read(reinterpret_cast<char*>(&t.seed), sizeof(std::uint64_t));
    is.read(reinterpret_cast<char*>(&t.config_hash), sizeof(std::uint64_t));
    is.read(reinterpret_cast<char*>(&n), sizeof(std::uint64_t));
    if (!is || n > (std::uint64_t{1} << 36)) throw std::runtime_error("corrupt trace header: " + path.string());
    t.counts.resize(n);
    is.read(reinterpret_cast<char*>(t.counts.data()), static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
    if (!is) throw std::runtime_error("truncated trace: " + path.string());
  } else {
    is.clear();
    is.seekg(0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        const std::string val = line.substr(eq + 1);
        try {
          if (key == "period_s") t.period = std::stod(val);
          else if (key == "seed") t.seed = std::stoull(val);
          else if (key == "config_hash") t.config_hash = std::stoull(val);
        } catch (const std::exception&) {
          throw std::runtime_error("bad header value on line " + std::to_string(lineno));
        }
        continue;
      }
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(line, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("bad count on line " + std::to_string(lineno));
      }
      if (v < 0 || v > std::numeric_limits<std::uint32_t>::max() ||
          line.find_first_not_of(" \t\r", used) != std::string::npos)
        throw std::runtime_error("bad count on line " + std::to_string(lineno));
      t.counts.push_back(static_cast<std::uint32_t>(v));
    }
  }
  if (!(t.period > 0.0)) throw std::runtime_error("trace has no valid period: " + path.string());
  return t;
}

}  // namespace cpdd
