#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cpdd/cli.hpp"
#include "cpdd/fitting.hpp"
#include "cpdd/noise.hpp"
#include "cpdd/parallel.hpp"
#include "cpdd/qdyne.hpp"
#include "cpdd/sensing.hpp"
#include "cpdd/sequences.hpp"
#include "cpdd/special_functions.hpp"
#include "cpdd/units.hpp"
#include "cpdd/validation.hpp"

namespace cpdd::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* v = std::getenv("CPDD_LOG");
  if (!v) return LogLevel::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0" || s == "error") return LogLevel::Quiet;
  if (s == "debug" || s == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

struct Context {
  std::string command;
  Config cfg;
  fs::path out_dir;
  std::uint64_t seed = kDefaultSeed;
  bool dat = false;
  std::ostream& out;
  std::ostream& err;
  LogLevel level = LogLevel::Info;

  void info(const std::string& msg) const {
    if (level != LogLevel::Quiet) err << "[cpdd] " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level == LogLevel::Debug) err << "[cpdd:debug] " << msg << '\n';
  }
};

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(p, mode);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

void write_sidecar(const Context& ctx, const fs::path& data, const json& results) {
  json j;
  j["command"] = ctx.command;
  j["version"] = CPDD_VERSION;
  j["seed"] = ctx.seed;
  j["data_file"] = data.filename().string();
  j["config"] = ctx.cfg.resolved();
  j["results"] = results;
  auto os = open_out(fs::path(data.string() + ".json"));
  os << j.dump(2) << '\n';
  if (!os) throw IoError("cannot write sidecar for " + data.string());
}

void write_scan(const Context& ctx, const ScanResult& scan, const std::string& stem, const json& results) {
  const fs::path csv = ctx.out_dir / (stem + ".csv");
  {
    auto os = open_out(csv);
    scan.write_csv(os);
    if (!os) throw IoError("write failed: " + csv.string());
  }
  if (ctx.dat) {
    auto os = open_out(ctx.out_dir / (stem + ".dat"));
    scan.write_dat(os);
  }
  write_sidecar(ctx, csv, results);
  ctx.info("wrote " + csv.string());
}

double ns(double v) { return v * 1e-9; }
double us(double v) { return v * 1e-6; }

Readout parse_readout(Config& c, const std::string& fallback) {
  return c.text("readout", fallback, {"slope", "variance"}) == "slope" ? Readout::Slope : Readout::Variance;
}

FrameChoice::Kind parse_frame(Config& c, const std::string& fallback) {
  const auto f = c.text("frame", fallback, {"rotating", "dressed"});
  return f == "dressed" ? FrameChoice::Kind::Dressed : FrameChoice::Kind::RotatingRWA;
}

MeasurementModel parse_model(Config& c) {
  MeasurementModel m;
  m.kappa = c.positive("kappa", m.kappa);
  m.c_max = c.number("c_max", m.c_max);
  m.bright = c.number("bright_level", m.bright);
  m.dark = c.number("dark_level", m.dark);
  const double t2 = c.number("t2_us", 0.0);
  m.t2 = t2 > 0.0 ? us(t2) : std::numeric_limits<double>::infinity();
  m.stretch = c.positive("stretch", m.stretch);
  m.photons = c.positive("photons", m.photons);
  m.validate();
  return m;
}

/// Shared sequence keys: protocol, larmor_hz, interval_ns, rabi_hz,
/// repetitions, phase_table_pi / phase_table_file.
SequenceSpec parse_sequence(Config& c, const std::string& protocol_fallback, double* larmor_out = nullptr) {
  const auto proto = c.text("protocol", protocol_fallback,
                            {"cx", "rotary_echo", "cxy4", "cxy8", "pulsed_xy8", "custom"});
  const double larmor = angular(c.positive("larmor_hz", 8e6));
  if (larmor_out) *larmor_out = larmor;
  const double interval = ns(c.positive("interval_ns", 1e9 * kPi / larmor));
  const double rabi = angular(c.positive("rabi_hz", hertz(kPi / interval)));
  const auto reps = static_cast<std::size_t>(c.integer("repetitions", 1));
  std::vector<double> custom;
  if (c.has("phase_table_file")) {
    custom = read_phase_table(c.text("phase_table_file", ""));
  } else {
    c.text("phase_table_file", "");
    for (double p : c.numbers("phase_table_pi", {})) custom.push_back(kPi * p);
  }
  SequenceSpec s;
  if (proto == "cx") s = build_cx_intervals(rabi, interval, reps);
  else if (proto == "rotary_echo") s = build_rotary_echo(rabi, interval, reps);
  else if (proto == "cxy4") s = build_cxy4(rabi, interval, reps);
  else if (proto == "cxy8") s = build_cxy8(rabi, interval, reps);
  else if (proto == "pulsed_xy8") s = build_xy8_pulsed(rabi, interval, reps);
  else {
    if (custom.empty()) throw ConfigError("protocol 'custom' needs phase_table_pi or phase_table_file");
    s = build_custom(rabi, interval, reps, custom);
  }
  if (proto != "custom" && !custom.empty())
    throw ConfigError("phase tables only apply to protocol 'custom'");
  return s;
}

std::vector<double> grid(Config& c, const std::string& stem, const std::string& unit, double lo, double hi,
                         std::size_t n) {
  const double a = c.number(stem + "_min" + unit, lo);
  const double b = c.number(stem + "_max" + unit, hi);
  const auto k = static_cast<std::size_t>(c.integer(stem + "_points", n));
  if (k < 1) throw ConfigError("field '" + stem + "_points': expected at least 1");
  if (k > 1 && !(b > a)) throw ConfigError("field '" + stem + "_max" + unit + "': must exceed the minimum");
  return linspace(a, b, k);
}

// ---------------------------------------------------------------- commands

int cmd_robustness_map(Context& ctx) {
  auto& c = ctx.cfg;
  double larmor = 0.0;
  const SequenceSpec spec = parse_sequence(c, "cxy8", &larmor);
  const auto dr = grid(c, "detuning", "_over_larmor", -0.2, 0.2, 41);
  const auto ar = grid(c, "amplitude_error", "_over_larmor", -0.2, 0.2, 41);
  const auto shots = static_cast<std::size_t>(c.integer("shots", 0));
  const auto dist = c.text("spread_distribution", "uniform", {"uniform", "gaussian"});
  const double dsp = c.number("detuning_spread_over_larmor", 0.0);
  const double asp = c.number("amplitude_spread_over_larmor", 0.0);
  const double threshold = c.number("threshold", 0.99);
  c.finish();

  std::vector<double> d, a;
  for (double x : dr) d.push_back(x * larmor);
  for (double x : ar) a.push_back(x * larmor);
  RobustnessMap map;
  if (shots == 0) {
    map = robustness_map(spec, larmor, d, a);
  } else {
    const auto kind = dist == "gaussian" ? NoiseDistribution::Kind::Gaussian : NoiseDistribution::Kind::Uniform;
    map = robustness_map_monte_carlo(spec, larmor, d, a, {kind, dsp * larmor}, {kind, asp * larmor}, shots,
                                     ctx.seed);
  }
  const fs::path csv = ctx.out_dir / "robustness_map.csv";
  {
    auto os = open_out(csv);
    map.write_csv(os);
  }
  json r;
  r["cells"] = map.fidelity.size();
  r["cells_above_threshold"] = map.area_above(threshold);
  r["threshold"] = threshold;
  write_sidecar(ctx, csv, r);
  ctx.info("wrote " + csv.string());
  return kOk;
}

TimeScanConfig parse_time_scan(Config& c) {
  TimeScanConfig t;
  const auto proto = c.text("protocol", "cxy8", {"cx", "cxy8"});
  t.protocol = proto == "cx" ? Protocol::CX : Protocol::CXY8;
  t.interval = ns(c.positive("interval_ns", 62.5));
  t.window = us(c.positive("window_us", 40.0));
  t.sample_step = us(c.positive("sample_step_us", 0.5));
  t.signal.amplitude = angular(c.positive("signal_amplitude_hz", 11.7e3));
  t.signal.angular_frequency = angular(c.positive("larmor_hz", 8e6));
  t.signal.phase = c.number("signal_phase_rad", 0.0);
  t.readout = parse_readout(c, "variance");
  t.frame = parse_frame(c, "rotating");
  t.substep = ns(c.number("substep_ns", 0.0));
  t.model = parse_model(c);
  return t;
}

int cmd_time_scan(Context& ctx) {
  auto& c = ctx.cfg;
  const TimeScanConfig t = parse_time_scan(c);
  const auto dets = c.numbers("amplitude_detunings_hz", {0.0});
  c.finish();
  std::vector<double> d;
  for (double x : dets) d.push_back(angular(x));
  const auto traces = time_scan(t, d);
  ScanResult all;
  all.x_name = "time";
  all.x_unit = "s";
  all.y_name = traces.front().y_name;
  json r = json::array();
  const fs::path csv = ctx.out_dir / "time_scan.csv";
  {
    auto os = open_out(csv);
    os.precision(12);
    os << "amplitude_detuning_hz,time_s," << all.y_name << '\n';
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (std::size_t k = 0; k < traces[i].size(); ++k)
        os << dets[i] << ',' << traces[i].x[k] << ',' << traces[i].mean[k] << '\n';
      r.push_back({{"amplitude_detuning_hz", dets[i]}, {"contrast", trace_contrast(traces[i])}});
    }
  }
  if (ctx.dat) {
    auto os = open_out(ctx.out_dir / "time_scan.dat");
    os.precision(12);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      os << "# amplitude_detuning_hz " << dets[i] << '\n';
      for (std::size_t k = 0; k < traces[i].size(); ++k) os << traces[i].x[k] << ' ' << traces[i].mean[k] << '\n';
      os << "\n\n";
    }
  }
  write_sidecar(ctx, csv, json{{"traces", r}});
  ctx.info("wrote " + csv.string());
  return kOk;
}

int cmd_detuning_scan(Context& ctx) {
  auto& c = ctx.cfg;
  const TimeScanConfig t = parse_time_scan(c);
  const auto dets = grid(c, "amplitude_detuning", "_hz", -200e3, 200e3, 41);
  const double level = c.number("half_width_level", 0.5);
  c.finish();
  std::vector<double> d;
  for (double x : dets) d.push_back(angular(x));
  const ScanResult s = contrast_vs_detuning(t, d);
  json r;
  const double hw = contrast_half_width(s, level);
  r["half_width_hz"] = std::isfinite(hw) ? json(hw) : json(nullptr);
  write_scan(ctx, s, "detuning_scan", r);
  return kOk;
}

int cmd_freq_scan(Context& ctx) {
  auto& c = ctx.cfg;
  FrequencyScanConfig f;
  const auto proto = c.text("protocol", "cxy8", {"cxy8", "pulsed_xy8"});
  f.protocol = proto == "cxy8" ? Protocol::CXY8 : Protocol::PulsedXY8;
  f.repetitions = static_cast<std::size_t>(c.integer("repetitions", 5));
  f.signal.angular_frequency = angular(c.positive("larmor_hz", 1.7e6));
  f.signal.phase = c.number("signal_phase_rad", 0.0);
  f.pulsed_rabi = angular(c.positive("pulsed_rabi_hz", 14e6));
  f.phase_average = static_cast<std::size_t>(c.integer("phase_average", f.phase_average));
  f.readout = parse_readout(c, "variance");
  f.frame = parse_frame(c, proto == "cxy8" ? "dressed" : "rotating");
  f.substep = ns(c.number("substep_ns", 0.0));
  f.model = parse_model(c);
  const double fl = hertz(f.signal.angular_frequency);
  const auto freqs = grid(c, "frequency", "_hz", fl - 150e3, fl + 150e3, 121);
  const auto amp = c.optional_number("signal_amplitude_hz");
  const double theta = c.number("resonant_angle_rad", f.phase_average > 1 ? kBesselJ0FirstZero : kPi / 2);
  c.finish();
  f.signal.amplitude = amp ? angular(*amp) : resonant_amplitude_for_angle(f, theta);
  const ScanResult s = frequency_scan(f, freqs);
  json r;
  r["signal_amplitude_hz"] = hertz(f.signal.amplitude);
  try {
    r["fwhm_hz"] = dip_fwhm(s);
  } catch (const std::runtime_error& e) {
    r["fwhm_hz"] = nullptr;
    ctx.info(std::string("dip width unavailable: ") + e.what());
  }
  write_scan(ctx, s, "freq_scan", r);
  return kOk;
}

int cmd_order_scan(Context& ctx) {
  auto& c = ctx.cfg;
  OrderScanConfig o;
  o.larmor = angular(c.positive("larmor_hz", 8e6));
  o.interval = ns(c.positive("interval_ns", 1e9 * kPi / o.larmor));
  const auto orders = c.integers("orders", {});
  const auto order_max = c.integer("order_max", 200);
  const auto order_step = c.integer("order_step", 4);
  o.amplitude = angular(c.positive("signal_amplitude_hz", 46.7e3));
  o.shots = static_cast<std::size_t>(c.integer("shots", 10000));
  o.frame = parse_frame(c, "dressed");
  o.substep = ns(c.number("substep_ns", 0.0));
  o.model = parse_model(c);
  c.finish();
  if (orders.empty()) {
    if (order_step < 1) throw ConfigError("field 'order_step': expected at least 1");
    for (std::uint64_t n = order_step; n <= order_max; n += order_step) o.orders.push_back(n);
  } else {
    o.orders.assign(orders.begin(), orders.end());
  }
  o.seed = ctx.seed;
  const ScanResult s = order_scan(o);
  const FitResult fit = fit_bessel_decay(s.x, s.mean);
  if (!fit.converged) throw NumericError("Bessel-decay fit did not converge");
  json r;
  r["fit"] = json::parse(fit.to_json());
  r["g_hz"] = hertz(fit.value("g"));
  r["b_tesla"] = 2.0 * fit.value("g") / o.model.gamma;
  r["b_err_tesla"] = 2.0 * fit.error("g") / o.model.gamma;
  write_scan(ctx, s, "order_scan", r);
  return kOk;
}

int cmd_spurious(Context& ctx) {
  auto& c = ctx.cfg;
  SpuriousConfig s;
  s.larmor = angular(c.positive("larmor_hz", 2e6));
  s.amplitude_over_rabi = c.positive("amplitude_over_rabi", 0.01);
  s.blocks = static_cast<std::size_t>(c.integer("blocks", 120));
  s.runs = static_cast<std::size_t>(c.integer("runs", 640));
  s.randomized = c.flag("randomized", false);
  s.readout = parse_readout(c, "variance");
  s.substep = ns(c.number("substep_ns", 0.0));
  s.model = parse_model(c);
  const double fl = hertz(s.larmor);
  const auto freqs = grid(c, "frequency", "_hz", 0.5 * fl, 2.5 * fl, 401);
  c.finish();
  s.seed = ctx.seed;
  const ScanResult r = spurious_spectrum(s, freqs);
  write_scan(ctx, r, s.randomized ? "spurious_randomized" : "spurious", json::object());
  return kOk;
}

QdyneConfig parse_qdyne(Context& ctx) {
  auto& c = ctx.cfg;
  QdyneConfig q;
  double larmor = 0.0;
  q.sequence = parse_sequence(c, "cxy8", &larmor);
  if (!c.has("repetitions")) q.sequence.repetitions = 10;
  const double overhead = us(c.number("overhead_us", 3.646));
  const auto m = c.integer("measurements", 0);
  const double duration = c.number("duration_s", 120.0);
  q.signal_hz = c.positive("signal_hz", 8000001.8883);
  q.amplitude = angular(c.number("signal_amplitude_hz", 46.7e3));
  q.xi0 = c.number("signal_phase_rad", 0.0);
  q.prior_hz = c.positive("prior_hz", q.signal_hz);
  q.model = parse_model(c);
  if (!c.has("t2_us")) q.model.t2 = 250e-6;
  q.schedule = build_qdyne_schedule(q.sequence, overhead, 1);
  q.schedule.measurements =
      m > 0 ? m : static_cast<std::uint64_t>(std::llround(duration / q.schedule.period));
  q.seed = ctx.seed;
  q.validate();
  return q;
}

json scaling_json(const ScalingAnalysis& s) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"total_time_s", r.total_time},
                    {"slices", r.slices},
                    {"linewidth_hz", r.linewidth_hz},
                    {"nu0_err_hz", r.nu0_err_hz},
                    {"snr", r.snr}});
  return {{"rows", rows},
          {"linewidth_slope", s.linewidth_slope},
          {"nu0_err_slope", s.nu0_err_slope},
          {"snr_slope", s.snr_slope}};
}

int cmd_qdyne_sim(Context& ctx) {
  const QdyneConfig q = parse_qdyne(ctx);
  auto& c = ctx.cfg;
  const auto format = c.text("format", "binary", {"binary", "csv"});
  c.finish();
  ctx.info("simulating " + std::to_string(q.schedule.measurements) + " measurements");
  const QdyneTrace t = simulate_trace(q);
  const fs::path p = ctx.out_dir / (format == "csv" ? "qdyne_trace.csv" : "qdyne_trace.bin");
  try {
    if (format == "csv") write_trace_csv(t, p);
    else write_trace_binary(t, p);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  json r;
  r["measurements"] = t.counts.size();
  r["period_s"] = t.period;
  r["total_time_s"] = t.total_time();
  r["config_hash"] = t.config_hash;
  const double lo = std::round(q.signal_hz * t.period) / t.period;
  r["expected_beat_hz"] = std::abs(q.signal_hz - lo);
  write_sidecar(ctx, p, r);
  ctx.info("wrote " + p.string());
  return kOk;
}

int cmd_qdyne_analyze(Context& ctx) {
  auto& c = ctx.cfg;
  const auto path = c.text("trace_file", "");
  const double prior = c.positive("prior_hz", 8000001.0);
  QdyneAnalysisOptions opt;
  opt.window_bins = static_cast<std::size_t>(c.integer("window_bins", 50));
  opt.snr_threshold = c.number("snr_threshold", 3.0);
  const auto slices = c.integers("slice_samples", {});
  const double b0 = c.number("b0_tesla", 0.0);
  c.finish();
  if (path.empty()) throw ConfigError("field 'trace_file': expected a path, got \"\"");
  QdyneTrace t;
  try {
    t = read_trace(path);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  const QdyneAnalysis a = analyze_trace(t, prior, opt);
  json r = json::parse(a.to_json());
  r["total_time_s"] = t.total_time();
  if (a.detected && b0 > 0.0) {
    const auto s = sensitivity_from_fit(a.nu0_err_hz, a.snr, b0, t.total_time());
    r["eta_frequency_hz_per_hz32"] = s.frequency;
    r["eta_amplitude_tesla_per_rthz"] = s.amplitude;
  }
  if (!slices.empty()) {
    std::vector<std::size_t> lens(slices.begin(), slices.end());
    r["scaling"] = scaling_json(scaling_analysis(t, lens, prior));
  }
  const fs::path p = ctx.out_dir / "qdyne_analysis.json";
  {
    auto os = open_out(p);
    json full;
    full["command"] = ctx.command;
    full["version"] = CPDD_VERSION;
    full["config"] = c.resolved();
    full["results"] = r;
    os << full.dump(2) << '\n';
  }
  ctx.out << "nu0_hz " << std::setprecision(15) << a.nu0_hz << " +- " << a.nu0_err_hz << " (snr "
          << std::setprecision(4) << a.snr << (a.detected ? "" : ", not detected")
          << (a.ambiguous ? ", ambiguous" : "") << ")\n";
  if (!a.fit.converged) throw NumericError("Lorentzian fit did not converge");
  return a.detected ? kOk : kNumericError;
}

int cmd_sensitivity(Context& ctx) {
  auto& c = ctx.cfg;
  MeasurementModel m = parse_model(c);
  if (!c.has("t2_us")) m.t2 = 250e-6;
  const double t = us(c.positive("sensing_time_us", 5.0));
  const double toh = us(c.number("overhead_us", 3.646));
  const auto err = c.optional_number("nu0_err_hz");
  const auto snr = c.optional_number("snr");
  const auto b0 = c.optional_number("b0_tesla");
  const auto tt = c.optional_number("total_time_s");
  c.finish();
  json r;
  r["eta_tesla_per_rthz"] = sensitivity_shot_noise(m, t, toh);
  r["eta_nt_per_rthz"] = 1e9 * sensitivity_shot_noise(m, t, toh);
  if (std::isfinite(m.t2) && m.stretch == 1.0) {
    const double topt = optimal_sensing_time(m.t2, toh);
    r["optimal_time_us"] = topt * 1e6;
    r["eta_optimal_nt_per_rthz"] = 1e9 * sensitivity_shot_noise(m, topt, toh);
  }
  if (err && snr && b0 && tt) {
    const auto s = sensitivity_from_fit(*err, *snr, *b0, *tt);
    r["eta_frequency_hz_per_hz32"] = s.frequency;
    r["eta_amplitude_tesla_per_rthz"] = s.amplitude;
  }
  const fs::path p = ctx.out_dir / "sensitivity.json";
  {
    auto os = open_out(p);
    json full;
    full["command"] = ctx.command;
    full["version"] = CPDD_VERSION;
    full["config"] = c.resolved();
    full["results"] = r;
    os << full.dump(2) << '\n';
  }
  ctx.out << r.dump(2) << '\n';
  return kOk;
}

int cmd_validate(Context& ctx) {
  ctx.cfg.finish();
  const auto checks = run_validation();
  print_validation_table(checks, ctx.out);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  return ok ? kOk : kNumericError;
}

const std::map<std::string, std::function<int(Context&)>>& commands() {
  static const std::map<std::string, std::function<int(Context&)>> m = {
      {"robustness-map", cmd_robustness_map}, {"time-scan", cmd_time_scan},
      {"detuning-scan", cmd_detuning_scan},   {"freq-scan", cmd_freq_scan},
      {"order-scan", cmd_order_scan},         {"spurious", cmd_spurious},
      {"qdyne-sim", cmd_qdyne_sim},           {"qdyne-analyze", cmd_qdyne_analyze},
      {"sensitivity", cmd_sensitivity},       {"validate", cmd_validate}};
  return m;
}

fs::path preset_path(const std::string& name) {
  fs::path p(name);
  if (p.has_extension()) return p.is_absolute() ? p : fs::path(CPDD_PRESET_DIR) / p;
  return fs::path(CPDD_PRESET_DIR) / (name + ".json");
}

}  // namespace

std::string usage() {
  std::ostringstream os;
  os << "usage: cpdd <command> [--config FILE] [--preset NAME] [--out DIR] [--seed N] [--threads N] [--dat]\n"
     << "commands:";
  for (const auto& [k, v] : commands()) os << ' ' << k;
  os << "\nCPDD_LOG=quiet|info|debug sets verbosity.\n";
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << usage();
    return kConfigError;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h") {
    out << usage();
    return kOk;
  }
  if (command == "--version") {
    out << CPDD_VERSION << '\n';
    return kOk;
  }
  const auto it = commands().find(command);
  if (it == commands().end()) {
    err << "unknown command '" << command << "'\n" << usage();
    return kConfigError;
  }

  CLI::App app{"cpdd " + command};
  std::string config_path, preset, out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool dat = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--preset", preset, "bundled preset name");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "64-bit RNG seed");
  app.add_option("--threads", threads, "OpenMP worker count (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--dat", dat, "also write gnuplot .dat files");
  std::vector<std::string> rest(argv + 2, argv + argc);
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help() << usage();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << usage();
    return kConfigError;
  }

  try {
    Config cfg;
    if (!config_path.empty()) cfg = Config::load(config_path);
    if (!preset.empty()) cfg.merge_defaults(Config::load(preset_path(preset).string()));
    if (cfg.has("command")) {
      const auto want = cfg.text("command", command);
      if (want != command) throw ConfigError("config is for '" + want + "', not '" + command + "'");
    }
    std::uint64_t s = kDefaultSeed;
    if (cfg.has("seed") || seed) {
      s = cfg.integer("seed", kDefaultSeed);
      if (seed) s = *seed;
    }
    set_thread_count(threads);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir);
    Context ctx{command, std::move(cfg), fs::path(out_dir), s, dat, out, err, log_level()};
    ctx.debug("threads " + std::to_string(thread_count()) + ", seed " + std::to_string(s));
    return it->second(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const NumericError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericError;
  }
}

}  // namespace cpdd::cli
