#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "orthonewton/harness.hpp"

namespace on = orthonewton;

static void BM_InnerDirection(benchmark::State& state) {
  const on::QuadraticTraceModel model(on::random_symmetric(state.range(0), 11), 4);
  const auto u = on::initial_guess(state.range(0), 4, 3);
  const on::LocalDerivatives local(model, u, on::HessianMode::exact);
  const on::SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(on::inner_direction_cg(local, cfg.sigma, cfg));
}
BENCHMARK(BM_InnerDirection)->Arg(100)->Arg(400);

static void BM_KsSolve(benchmark::State& state, on::SolverKind kind) {
  on::ExperimentConfig cfg;
  cfg.model = on::ModelKind::ks1d;
  cfg.n_g = 64;
  cfg.n = 4;
  cfg.ks.atoms = {{3.0, 4.0, 0.6}, {5.0, 4.0, 0.6}};
  cfg.solver = kind;
  cfg.seed = 7;
  cfg.solver_config.epsilon = 1e-10;
  const auto model = on::make_model(cfg);
  const auto u0 = on::initial_guess(cfg.n_g, cfg.n, cfg.seed);
  int iterations = 0;
  for (auto _ : state) {
    const auto r = on::solve(kind, *model, u0, cfg.solver_config);
    iterations = r.iterations();
    benchmark::DoNotOptimize(r.point);
  }
  state.counters["iterations"] = iterations;
}
BENCHMARK_CAPTURE(BM_KsSolve, newton_bt, on::SolverKind::newton_backtracking)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_KsSolve, newton_adaptive, on::SolverKind::newton_adaptive)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_KsSolve, gradient, on::SolverKind::gradient)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
