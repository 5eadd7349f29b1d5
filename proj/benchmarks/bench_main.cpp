#include <benchmark/benchmark.h>

#include "zeus/harness.hpp"
#include "zeus/skipper.hpp"
#include "zeus/solver.hpp"

using namespace zeus;

static void BM_MakeStepPlan(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make_step_plan(steps, 3, 0.2, 0.1));
}
BENCHMARK(BM_MakeStepPlan)->Arg(50)->Arg(1000);

static void BM_PredictorReduced(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Predictor p(PredictorStrategy::zeus());
  p.fresh(Vec(d, 1.0), 10);
  p.fresh(Vec(d, 1.5), 8);
  int j = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.reduced(j));
    j = j % 4 + 1;
  }
}
BENCHMARK(BM_PredictorReduced)->Arg(2)->Arg(16384);

static void BM_OracleEvaluate(benchmark::State& state) {
  const auto sched = Schedule::vp_cosine();
  OracleDenoiser den(reference_mixture(), sched, Parameterization::epsilon);
  const Vec x{0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(den.evaluate(x, 0.5, 25));
}
BENCHMARK(BM_OracleEvaluate);

static void BM_SolverStep(benchmark::State& state) {
  const auto sched = Schedule::vp_cosine();
  const TimeGrid grid(50);
  const auto kind = state.range(0) == 0 ? SolverKind::euler : SolverKind::dpmpp2m;
  const Vec psi(4096, 0.1);
  SolverState st = initial_state(Vec(4096, 0.5), grid);
  st = solver_step(kind, st, psi, Parameterization::epsilon, sched, grid);
  for (auto _ : state) benchmark::DoNotOptimize(solver_step(kind, st, psi, Parameterization::epsilon, sched, grid));
}
BENCHMARK(BM_SolverStep)->Arg(0)->Arg(1);

static void BM_AcceleratedRun(benchmark::State& state) {
  const auto sched = Schedule::vp_cosine();
  const auto plan = make_step_plan(50, static_cast<int>(state.range(0)), 0.2, 0.1);
  for (auto _ : state) {
    OracleDenoiser den(reference_mixture(), sched, Parameterization::epsilon);
    benchmark::DoNotOptimize(run_accelerated(den, plan, PredictorStrategy::zeus(), SolverKind::euler,
                                             Parameterization::epsilon, sched, TimeGrid(50), Vec{0.4, -0.7}));
  }
}
BENCHMARK(BM_AcceleratedRun)->Arg(0)->Arg(2);
BENCHMARK_MAIN();
