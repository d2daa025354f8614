#include <benchmark/benchmark.h>

#include <vector>

#include "ncsir/ncsir.hpp"

using namespace ncsir;

static void BM_Rhs(benchmark::State& state) {
  const auto cfg = builtin_scenario(ScenarioId::S1);
  const ControlVec u{0.3, 0.05, 0.05, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(rhs(cfg.x0, u, cfg.params));
}
BENCHMARK(BM_Rhs);

static void BM_IntegrateForward(benchmark::State& state) {
  const auto cfg = builtin_scenario(ScenarioId::S1);
  const Grid g(100.0, 100.0 / static_cast<double>(state.range(0)));
  const Trajectory<ControlVec> u(g, ControlVec{0.3, 0.05, 0.05, 0.05});
  for (auto _ : state) benchmark::DoNotOptimize(integrate_forward(cfg.x0, u, cfg.params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IntegrateForward)->Arg(1000)->Arg(10000);

static void BM_CostateBackward(benchmark::State& state) {
  const auto cfg = builtin_scenario(ScenarioId::S1);
  const Trajectory<ControlVec> u(cfg.grid, ControlVec{0.3, 0.05, 0.05, 0.05});
  const auto x = integrate_forward(cfg.x0, u, cfg.params);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_costate_backward(x, u, cfg.params, cfg.weights));
}
BENCHMARK(BM_CostateBackward);

static void BM_FbsScenario(benchmark::State& state) {
  const auto cfg = builtin_scenario(static_cast<ScenarioId>(state.range(0)));
  int iterations = 0;
  for (auto _ : state) {
    const auto r = fbs_solve(cfg.x0, cfg.params, cfg.weights, cfg.grid, cfg.fbs, cfg.mask);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.total_cost);
  }
  state.counters["sweeps"] = iterations;
}
BENCHMARK(BM_FbsScenario)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_SweepS2(benchmark::State& state) {
  const auto base = builtin_scenario(ScenarioId::S2);
  const std::vector<double> c1{1.0 / 3, 1, 3, 6, 9};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(base, SweepKnob::c1, c1, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_SweepS2)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
