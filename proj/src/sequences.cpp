#include "cpdd/sequences.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cpdd/random.hpp"
#include "cpdd/units.hpp"

namespace cpdd {

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::CX: return "CX";
    case Protocol::RotaryEcho: return "RotaryEcho";
    case Protocol::CXY4: return "CXY4";
    case Protocol::CXY8: return "CXY8";
    case Protocol::PulsedXY8: return "XY8";
    case Protocol::Custom: return "Custom";
  }
  return "?";
}

namespace phase_tables {
std::vector<double> xy8() {
  const double h = 0.5 * kPi;
  return {0.0, h, 0.0, h, h, 0.0, h, 0.0};
}
std::vector<double> xy4() { return {0.0, 0.5 * kPi, 0.0, 0.5 * kPi}; }
std::vector<double> rotary_echo() { return {0.0, kPi}; }
}  // namespace phase_tables

double SequenceSpec::total_duration() const {
  double t = interval * static_cast<double>(intervals());
  if (first_interval) t += *first_interval - interval;
  return t;
}

void SequenceSpec::validate() const {
  if (phase_table.empty()) throw std::invalid_argument("phase table must not be empty");
  if (repetitions < 1) throw std::invalid_argument("repetition count must be >= 1");
  if (!(interval > 0.0) || !std::isfinite(interval))
    throw std::invalid_argument("interval must be > 0");
  if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw std::invalid_argument("Rabi amplitude must be >= 0");
  if (pulsed()) {
    if (!(pulse_length > 0.0)) throw std::invalid_argument("pulse length must be > 0");
    if (pulse_length > interval * (1.0 + 1e-12))
      throw std::invalid_argument("pulse longer than its slot");
    if (first_interval) throw std::invalid_argument("first-interval alignment is for continuous drives");
  }
  if (!block_phases.empty() && block_phases.size() != repetitions)
    throw std::invalid_argument("one block phase per repetition required");
  if (first_interval && !(*first_interval > 0.0 && *first_interval <= interval * (1.0 + 1e-12)))
    throw std::invalid_argument("first interval must lie in (0, T]");
}

std::vector<DriveSegment> build_cx(double rabi, double total_time) {
  if (!(total_time > 0.0)) throw std::invalid_argument("CX drive needs a positive duration");
  if (!(rabi >= 0.0)) throw std::invalid_argument("Rabi amplitude must be >= 0");
  return {DriveSegment{total_time, rabi, 0.5 * kPi, 0.0}};
}

namespace {
SequenceSpec continuous(Protocol p, double rabi, double interval, std::size_t reps,
                        std::vector<double> table) {
  SequenceSpec s;
  s.protocol = p;
  s.phase_table = std::move(table);
  s.interval = interval;
  s.repetitions = reps;
  s.rabi = rabi;
  s.validate();
  return s;
}
}  // namespace

SequenceSpec build_cx_intervals(double rabi, double interval, std::size_t intervals) {
  return continuous(Protocol::CX, rabi, interval, intervals, {0.5 * kPi});
}
SequenceSpec build_cxy8(double rabi, double interval, std::size_t repetitions) {
  return continuous(Protocol::CXY8, rabi, interval, repetitions, phase_tables::xy8());
}
SequenceSpec build_cxy4(double rabi, double interval, std::size_t repetitions) {
  return continuous(Protocol::CXY4, rabi, interval, repetitions, phase_tables::xy4());
}
SequenceSpec build_rotary_echo(double rabi, double interval, std::size_t repetitions) {
  return continuous(Protocol::RotaryEcho, rabi, interval, repetitions, phase_tables::rotary_echo());
}
SequenceSpec build_custom(double rabi, double interval, std::size_t repetitions,
                          std::vector<double> phase_table) {
  return continuous(Protocol::Custom, rabi, interval, repetitions, std::move(phase_table));
}

SequenceSpec build_xy8_pulsed(double rabi, double tau, std::size_t repetitions) {
  if (!(rabi > 0.0)) throw std::invalid_argument("pulsed XY8 needs Rabi amplitude > 0");
  SequenceSpec s;
  s.protocol = Protocol::PulsedXY8;
  s.phase_table = phase_tables::xy8();
  s.interval = tau;
  s.pulse_length = kPi / rabi;
  s.repetitions = repetitions;
  s.rabi = rabi;
  s.validate();
  return s;
}

SequenceSpec randomize_global_phase(const SequenceSpec& spec, std::uint64_t seed) {
  SequenceSpec out = spec;
  out.block_phases.resize(spec.repetitions);
  CounterRng rng(seed, 0x5eed);
  for (auto& p : out.block_phases) p = kTwoPi * rng.uniform();
  return out;
}

SequenceSpec align_first_interval(const SequenceSpec& spec, double larmor, double xi) {
  if (!(larmor > 0.0)) throw std::invalid_argument("alignment needs omega_L > 0");
  SequenceSpec out = spec;
  // smallest t1 > 0 with ω_L t1 + ξ a multiple of π
  double t1 = (kPi - std::fmod(xi, kPi)) / larmor;
  if (t1 <= 0.0) t1 += kPi / larmor;
  while (t1 > spec.interval * (1.0 + 1e-12)) t1 -= kPi / larmor;
  if (!(t1 > 0.0)) throw std::invalid_argument("interval too short to align the first phase change");
  out.first_interval = t1;
  out.validate();
  return out;
}

std::vector<DriveSegment> to_segments(const SequenceSpec& spec) {
  spec.validate();
  std::vector<DriveSegment> segs;
  const std::size_t n = spec.phase_table.size();
  if (spec.pulsed()) {
    const double gap = 0.5 * (spec.interval - spec.pulse_length);
    segs.reserve(3 * spec.intervals());
    for (std::size_t r = 0; r < spec.repetitions; ++r) {
      const double extra = spec.randomized() ? spec.block_phases[r] : 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (gap > 0.0) segs.push_back({gap, 0.0, 0.0, 0.0});
        segs.push_back({spec.pulse_length, spec.rabi, spec.phase_table[k] + extra, 0.0});
        if (gap > 0.0) segs.push_back({gap, 0.0, 0.0, 0.0});
      }
    }
    return segs;
  }
  segs.reserve(spec.intervals());
  for (std::size_t r = 0; r < spec.repetitions; ++r) {
    const double extra = spec.randomized() ? spec.block_phases[r] : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = (r == 0 && k == 0 && spec.first_interval) ? *spec.first_interval : spec.interval;
      segs.push_back({d, spec.rabi, spec.phase_table[k] + extra, 0.0});
    }
  }
  return segs;
}

std::vector<double> block_end_times(const SequenceSpec& spec) {
  std::vector<double> t(spec.repetitions);
  const double shift = spec.first_interval ? *spec.first_interval - spec.interval : 0.0;
  for (std::size_t r = 0; r < spec.repetitions; ++r)
    t[r] = spec.block_duration() * static_cast<double>(r + 1) + shift;
  return t;
}

std::vector<double> parse_phase_table(const std::string& text) {
  std::vector<double> phases;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double v;
    if (!(fields >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::invalid_argument("phase table line " + std::to_string(lineno) + " is not a number");
    }
    std::string rest;
    if (fields >> rest)
      throw std::invalid_argument("phase table line " + std::to_string(lineno) + " has trailing text");
    phases.push_back(v * kPi);
  }
  if (phases.empty()) throw std::invalid_argument("phase table is empty");
  return phases;
}

std::vector<double> read_phase_table(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open phase table " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_phase_table(buf.str());
}

double QdyneSchedule::signal_phase(std::uint64_t k, double signal_hz, double xi0) const {
  const double cycles = signal_hz * period;
  // rounding error of the product, recovered exactly
  const double lost = std::fma(signal_hz, period, -cycles);
  double frac = (cycles - std::floor(cycles)) + lost;
  frac -= std::floor(frac);
  // k·frac reduced exactly enough: split k so the product stays small
  const std::uint64_t hi = k >> 20;
  const std::uint64_t lo = k & ((1u << 20) - 1);
  double x = static_cast<double>(hi) * (frac * 1048576.0);
  x -= std::floor(x);
  double y = static_cast<double>(lo) * frac;
  y -= std::floor(y);
  double phase = xi0 + kTwoPi * (x + y);
  phase = std::fmod(phase, kTwoPi);
  if (phase < 0.0) phase += kTwoPi;
  return phase;
}

void QdyneSchedule::validate() const {
  if (!(sequence_duration > 0.0)) throw std::invalid_argument("t_seq must be > 0");
  if (!(overhead >= 0.0)) throw std::invalid_argument("t_oh must be >= 0");
  if (!(period > sequence_duration)) throw std::invalid_argument("T_L must exceed t_seq");
  if (measurements < 1) throw std::invalid_argument("need at least one measurement");
}

QdyneSchedule build_qdyne_schedule(const SequenceSpec& spec, double overhead,
                                   std::uint64_t measurements) {
  QdyneSchedule q;
  q.sequence_duration = spec.total_duration();
  q.overhead = overhead;
  q.period = q.sequence_duration + overhead;
  q.measurements = measurements;
  q.validate();
  return q;
}

}  // namespace cpdd
