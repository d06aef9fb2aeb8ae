#include <benchmark/benchmark.h>

#include <vector>

#include "qkdsim/detector.hpp"
#include "qkdsim/engine.hpp"
#include "qkdsim/optics.hpp"
#include "qkdsim/scenario.hpp"

namespace {

using namespace qkdsim;

void BM_EngineNormal(benchmark::State& state) {
  ScenarioConfig cfg = preset("normal");
  cfg.n_slots = state.range(0);
  const EngineOptions opts{state.range(1) != 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg, opts).metrics.K_sift);
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_slots);
  state.SetLabel(opts.skip_ahead ? "skip-ahead" : "stepped");
}
BENCHMARK(BM_EngineNormal)->Args({10'000'000, 1})->Args({1'000'000, 0})->Unit(benchmark::kMillisecond);

void BM_EngineFullAttack(benchmark::State& state) {
  ScenarioConfig cfg = preset("full-attack");
  cfg.n_slots = 1'000'000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg).metrics.K_sift);
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_slots);
}
BENCHMARK(BM_EngineFullAttack)->Unit(benchmark::kMillisecond);

void BM_DetectorStep(benchmark::State& state) {
  DetectorUnit unit(1, DetectorParams{});
  Rng rng(1);
  const double incident = 1e-3 * static_cast<double>(state.range(0));
  std::int64_t slot = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(unit.step(incident, slot++, rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DetectorStep)->Arg(1)->Arg(1'000'000)->Arg(100'000'000);

void BM_Mzi(benchmark::State& state) {
  std::vector<SlotField> fields(1024);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    fields[i] = {static_cast<std::int64_t>(i), 0.2 + 0.001 * static_cast<double>(i % 7),
                 (i % 3 == 0) ? kPi : 0.0, 1551.0};
  }
  for (auto _ : state) {
    double sum = 0.0;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto p = mzi_interfere(fields[i], fields[i - 1]);
      sum += p.port1_mean - p.port2_mean;
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fields.size() - 1));
}
BENCHMARK(BM_Mzi);

}  // namespace

BENCHMARK_MAIN();
