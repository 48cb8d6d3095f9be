#include "doctest.h"

#include "cpdd/noise.hpp"
#include "cpdd/parallel.hpp"
#include "cpdd/qdyne.hpp"
#include "cpdd/sensing.hpp"

using namespace cpdd;

namespace {

const double kWl = angular(8e6);
const double kT = kPi / kWl;

// runs `f` with each worker count and checks every result equals the serial one
template <class F>
void same_for_all_thread_counts(F f) {
  const int before = thread_count();
  const auto reference = f(Exec::Serial);
  for (int n : {1, 2, 3, 7}) {
    set_thread_count(n);
    CAPTURE(n);
    CHECK(thread_count() == n);
    CHECK(f(Exec::Parallel) == reference);
  }
  set_thread_count(before);
}

}  // namespace

TEST_CASE("thread count control") {
  const int before = thread_count();
  set_thread_count(3);
  CHECK(thread_count() == 3);
  set_thread_count(0);  // keeps the current setting
  CHECK(thread_count() == 3);
  set_thread_count(before);
  CHECK(thread_count() == before);
}

TEST_CASE("Monte Carlo robustness map") {
  const auto d = linspace(-0.1 * kWl, 0.1 * kWl, 5);
  const NoiseDistribution u{NoiseDistribution::Kind::Uniform, 0.02 * kWl};
  const auto spec = build_cxy8(kWl, kT, 1);
  same_for_all_thread_counts(
      [&](Exec e) { return robustness_map_monte_carlo(spec, kWl, d, d, u, u, 9, 77, e).fidelity; });
}

TEST_CASE("time scans") {
  TimeScanConfig cfg;
  cfg.window = 4e-6;
  const std::vector<double> d = {0.0, angular(30e3), angular(300e3)};
  same_for_all_thread_counts([&](Exec e) {
    std::vector<std::vector<double>> out;
    for (const auto& t : time_scan(cfg, d, e)) out.push_back(t.mean);
    return out;
  });
}

TEST_CASE("Gaussian variance ensemble") {
  OrderScanConfig o;
  o.orders = {4, 12, 24};
  o.shots = 33;
  same_for_all_thread_counts([&](Exec e) {
    const auto s = gaussian_variance_scan(o, 2e-6, e);
    return std::vector<std::vector<double>>{s.mean, s.stderr_};
  });
}

TEST_CASE("spurious spectrum with randomized phases") {
  SpuriousConfig s;
  s.blocks = 10;
  s.runs = 12;
  s.randomized = true;
  const auto f = linspace(1.3e6, 1.4e6, 5);
  same_for_all_thread_counts([&](Exec e) { return spurious_spectrum(s, f, e).mean; });
}

TEST_CASE("Qdyne traces, unitary rates and slice scaling") {
  const auto c = reference_qdyne_config(std::size_t{1} << 21);
  same_for_all_thread_counts([&](Exec e) { return simulate_trace(c, e).counts; });
  same_for_all_thread_counts(
      [&](Exec e) { return expected_rates_unitary(c, 1000, 40, FrameChoice::Kind::Dressed, e); });

  const auto t = simulate_trace(c);
  std::vector<std::size_t> lens;
  for (int k = 16; k <= 21; ++k) lens.push_back(std::size_t{1} << k);
  same_for_all_thread_counts([&](Exec e) {
    const auto s = scaling_analysis(t, lens, c.prior_hz, e);
    std::vector<double> v;
    for (const auto& r : s.rows) v.insert(v.end(), {r.linewidth_hz, r.nu0_err_hz, r.snr});
    return v;
  });
}
