#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <limits>

#include "../oracles.hpp"
#include "cpdd/noise.hpp"
#include "cpdd/sensing.hpp"
#include "cpdd/sequences.hpp"
#include "cpdd/units.hpp"

using namespace cpdd;

namespace {
const double kWl = angular(8e6);
const double kT = kPi / kWl;

double segment_sum(const SequenceSpec& s) {
  double t = 0;
  for (const auto& seg : to_segments(s)) t += seg.duration;
  return t;
}
}  // namespace

TEST_CASE("phase tables") {
  const std::vector<double> xy8 = {0, kPi / 2, 0, kPi / 2, kPi / 2, 0, kPi / 2, 0};
  CHECK(phase_tables::xy8() == xy8);
  CHECK(phase_tables::xy4() == std::vector<double>(xy8.begin(), xy8.begin() + 4));
  CHECK(phase_tables::rotary_echo() == std::vector<double>{0.0, kPi});
  CHECK(build_cxy8(kWl, kT, 3).phase_table == xy8);
  CHECK(build_cxy4(kWl, kT, 3).phase_table.size() == 4);
}

TEST_CASE("segment durations add up to the declared total") {
  const std::vector<SequenceSpec> specs = {
      build_cxy8(kWl, kT, 80),          build_cxy4(kWl, kT, 120),  build_rotary_echo(kWl, kT, 33),
      build_cx_intervals(kWl, kT, 640), build_xy8_pulsed(150 * kWl, kT, 20),
      align_first_interval(build_cxy8(kWl, kT, 7), kWl, 0.9)};
  for (const auto& s : specs) {
    const double total = s.total_duration();
    const double ulp = total * std::numeric_limits<double>::epsilon();
    CHECK(std::abs(segment_sum(s) - total) <= static_cast<double>(to_segments(s).size()) * ulp);
  }
  const auto cx = build_cx(kWl, 40e-6);
  REQUIRE(cx.size() == 1);
  CHECK(cx[0].duration == 40e-6);
  CHECK(cx[0].phase == doctest::Approx(kPi / 2));
}

TEST_CASE("block end times") {
  const auto s = build_cxy8(kWl, kT, 5);
  const auto t = block_end_times(s);
  REQUIRE(t.size() == 5);
  CHECK(t.back() == doctest::Approx(s.total_duration()));
  CHECK(t[0] == doctest::Approx(8 * kT));
}

TEST_CASE("on-resonance CXY8 without signal is the identity up to sign") {
  for (std::size_t n : {1u, 2u, 7u, 50u}) {
    const Unitary2 u = sequence_propagator(build_cxy8(kWl, kT, n), 0.0, 0.0);
    CHECK(distance_up_to_global_phase(u, Unitary2()) < 1e-10);
    CHECK(std::abs(std::abs(u(0, 0).real()) - 1.0) < 1e-10);
  }
}

TEST_CASE("pulsed XY8 centres pulses in their slots") {
  const double rabi = 20 * kWl;
  const auto spec = build_xy8_pulsed(rabi, kT, 1);
  CHECK(spec.pulse_length == doctest::Approx(kPi / rabi));
  const auto segs = to_segments(spec);
  REQUIRE(segs.size() == 24);
  CHECK(segs[0].rabi == 0.0);
  CHECK(segs[0].duration == doctest::Approx(segs[2].duration));
  CHECK(segs[1].duration == doctest::Approx(spec.pulse_length));
  CHECK(segs[4].phase == doctest::Approx(kPi / 2));
}

TEST_CASE("accumulated-phase rates of pulsed XY8 and CPDD are in ratio 4/pi") {
  const double wl = angular(1e6), T = kPi / wl;
  const SignalField sig{angular(2e3), wl, 0.0};
  const double cpdd = phase_accumulation_rate(build_cxy8(kPi / T, T, 20), sig);
  const double pulsed = phase_accumulation_rate(build_xy8_pulsed(150 * wl, T, 20), sig);
  CHECK(cpdd / sig.amplitude == doctest::Approx(1.0).epsilon(0.02));
  CHECK(pulsed / cpdd == doctest::Approx(4 / kPi).epsilon(0.02));
}

TEST_CASE("first-interval alignment") {
  for (double xi : {0.0, 0.3, 1.7, 3.0, 5.5}) {
    const auto s = align_first_interval(build_cxy8(kWl, kT, 2), kWl, xi);
    REQUIRE(s.first_interval);
    const double t1 = *s.first_interval;
    CHECK(t1 > 0.0);
    CHECK(t1 <= kT * (1 + 1e-12));
    const double r = std::remainder(kWl * t1 + xi, kPi);
    CHECK(std::abs(r) < 1e-9);
  }
  CHECK_THROWS_AS(align_first_interval(build_cxy8(kWl, kT, 2), -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("phase randomization") {
  const auto base = build_cxy4(kWl, kT, 30);
  const auto a = randomize_global_phase(base, 17), b = randomize_global_phase(base, 17),
             c = randomize_global_phase(base, 18);
  CHECK(a.randomized());
  REQUIRE(a.block_phases.size() == 30);
  CHECK(a.block_phases == b.block_phases);
  CHECK(a.block_phases != c.block_phases);
  for (double p : a.block_phases) {
    CHECK(p >= 0.0);
    CHECK(p < kTwoPi);
  }
  const auto segs = to_segments(a);
  CHECK(segs[5].phase == doctest::Approx(base.phase_table[1] + a.block_phases[1]));
}

TEST_CASE("invalid sequences are rejected") {
  auto s = build_cxy8(kWl, kT, 2);
  s.interval = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = build_cxy8(kWl, kT, 2);
  s.repetitions = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = build_cxy8(kWl, kT, 2);
  s.block_phases = {0.1};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  auto p = build_xy8_pulsed(kWl, kT, 1);
  p.pulse_length = 2 * kT;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(build_custom(kWl, kT, 1, {}), std::invalid_argument);
}

TEST_CASE("phase table files are in units of pi with comments") {
  CHECK(parse_phase_table("0\n0.5 # y\n\n# only a comment\n1\n") == std::vector<double>{0.0, kPi / 2, kPi});
  CHECK_THROWS_AS(parse_phase_table("0\nabc\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_phase_table("# nothing\n"), std::invalid_argument);
  const auto path = std::filesystem::temp_directory_path() / "cpdd_phase_table_test.txt";
  {
    std::ofstream(path) << "0\n0.5\n0\n0.5\n";
  }
  CHECK(read_phase_table(path).size() == 4);
  std::filesystem::remove(path);
  CHECK_THROWS(read_phase_table("/nonexistent/phase/table"));
}

TEST_CASE("Qdyne schedule phases stay exact for long traces") {
  const auto sched = build_qdyne_schedule(build_cxy8(kWl, kT, 10), 3.646e-6, 13'900'000);
  CHECK(sched.sequence_duration == doctest::Approx(5e-6));
  CHECK(sched.period == doctest::Approx(8.646e-6));
  CHECK(sched.total_time() == doctest::Approx(13'900'000 * 8.646e-6));
  const double nu = 8000001.8883;
  const long double cycles = static_cast<long double>(nu) * static_cast<long double>(sched.period);
  const long double frac = cycles - std::floor(cycles);
  for (std::uint64_t k : {0ull, 1ull, 12345ull, 1048577ull, 13'899'999ull}) {
    long double ref = std::fmod(static_cast<long double>(k) * frac + 0.25L / (2 * 3.14159265358979323846L), 1.0L);
    const double got = sched.signal_phase(k, nu, 0.25) / kTwoPi;
    double d = std::abs(got - static_cast<double>(ref));
    d = std::min(d, 1.0 - d);
    CHECK(d < 1e-9);
  }
}
