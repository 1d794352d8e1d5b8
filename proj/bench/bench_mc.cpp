#include <benchmark/benchmark.h>

#include "bumpscan/detect.hpp"
#include "bumpscan/mc.hpp"

using namespace bumpscan;

namespace {

mc::ExperimentConfig grid_config(detect::TestKind kind) {
  mc::ExperimentConfig cfg;
  for (double rho : {-0.6, -0.3, 0.0, 0.3, 0.6}) cfg.models.push_back(mc::GridModel::from_rho(rho));
  cfg.deltas = {0.0, 0.2, 0.4, 0.6};
  cfg.trials = 200;
  cfg.kind = kind;
  return cfg;
}

void BM_PowerGridSerial(benchmark::State& state) {
  const auto cfg = grid_config(static_cast<detect::TestKind>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mc::estimate_power_grid_serial(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.models.size() * cfg.trials);
}

void BM_PowerGridParallel(benchmark::State& state) {
  const auto cfg = grid_config(static_cast<detect::TestKind>(state.range(0)));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(mc::estimate_power_grid(cfg, workers));
  state.SetItemsProcessed(state.iterations() * cfg.models.size() * cfg.trials);
}

void BM_ScanTest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const detect::TestConfig cfg{0.05, 0.1, n, arma::ArmaModel::ar1(0.5)};
  const detect::ScanTest test(cfg);
  const auto y = arma::sample_path(cfg.model, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(test(y));
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_DisjointTest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const detect::TestConfig cfg{0.05, 0.1, n, {{-0.5, 0.25}, {}}};
  const detect::DisjointLrtTest test(cfg);
  const auto y = arma::sample_path(cfg.model, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(test(y));
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

// range(0): 0 = scan, 1 = disjoint
BENCHMARK(BM_PowerGridSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PowerGridParallel)
    ->ArgsProduct({{0, 1}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_ScanTest)->Arg(829)->Arg(2157)->Arg(5312);
BENCHMARK(BM_DisjointTest)->Arg(829)->Arg(2157)->Arg(5312);

BENCHMARK_MAIN();
