// Serial reference vs OpenMP for each parallel kernel.

#include <benchmark/benchmark.h>

#include "cpdd/noise.hpp"
#include "cpdd/qdyne.hpp"
#include "cpdd/sensing.hpp"
#include "cpdd/sequences.hpp"
#include "cpdd/units.hpp"

namespace {

using cpdd::Exec;

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_RobustnessMap(benchmark::State& state) {
  const double wl = cpdd::angular(8e6);
  const auto spec = cpdd::build_cxy8(wl, cpdd::kPi / wl, 1);
  const auto grid = cpdd::linspace(-0.2 * wl, 0.2 * wl, 41);
  for (auto _ : state) benchmark::DoNotOptimize(cpdd::robustness_map(spec, wl, grid, grid, mode(state)));
}
BENCHMARK(BM_RobustnessMap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RobustnessMonteCarlo(benchmark::State& state) {
  const double wl = cpdd::angular(8e6);
  const auto spec = cpdd::build_cxy8(wl, cpdd::kPi / wl, 1);
  const auto grid = cpdd::linspace(-0.2 * wl, 0.2 * wl, 11);
  const cpdd::NoiseDistribution spread{cpdd::NoiseDistribution::Kind::Gaussian, 0.02 * wl};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        cpdd::robustness_map_monte_carlo(spec, wl, grid, grid, spread, spread, 32, 1, mode(state)));
}
BENCHMARK(BM_RobustnessMonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DetuningScan(benchmark::State& state) {
  cpdd::TimeScanConfig cfg;
  cfg.window = 10e-6;
  std::vector<double> d;
  for (int i = -4; i <= 4; ++i) d.push_back(cpdd::angular(25e3 * i));
  for (auto _ : state) benchmark::DoNotOptimize(cpdd::contrast_vs_detuning(cfg, d, mode(state)));
}
BENCHMARK(BM_DetuningScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OrderScan(benchmark::State& state) {
  cpdd::OrderScanConfig cfg;
  cfg.orders = {8, 16, 32, 64};
  cfg.shots = 200;
  for (auto _ : state) benchmark::DoNotOptimize(cpdd::order_scan(cfg, mode(state)));
}
BENCHMARK(BM_OrderScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_QdyneTrace(benchmark::State& state) {
  const auto cfg = cpdd::reference_qdyne_config(1u << 20);
  for (auto _ : state) benchmark::DoNotOptimize(cpdd::simulate_trace(cfg, mode(state)));
}
BENCHMARK(BM_QdyneTrace)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_QdyneScaling(benchmark::State& state) {
  const auto trace = cpdd::simulate_trace(cpdd::reference_qdyne_config(1u << 22));
  const std::vector<std::size_t> lens = {1u << 16, 1u << 18, 1u << 20, 1u << 22};
  for (auto _ : state)
    benchmark::DoNotOptimize(cpdd::scaling_analysis(trace, lens, 8000001.0, mode(state)));
}
BENCHMARK(BM_QdyneScaling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
