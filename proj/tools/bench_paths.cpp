#include <benchmark/benchmark.h>

#include <string>

#include "sfm/batch.hpp"
#include "sfm/scenario.hpp"

namespace {

const sfm::Scenario& scenario() {
  static const sfm::Scenario s = sfm::load_scenario(std::string(SFM_SCENARIO_DIR) + "/three_nodes.yaml");
  return s;
}

void BM_PathsSerial(benchmark::State& state) {
  const auto seeds = sfm::seed_range(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sfm::evaluate_paths_serial(scenario(), seeds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PathsParallel(benchmark::State& state) {
  const auto seeds = sfm::seed_range(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sfm::evaluate_paths_parallel(scenario(), seeds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_PathsSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathsParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
