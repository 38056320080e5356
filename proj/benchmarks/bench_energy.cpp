#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "orthonewton/energy.hpp"

namespace on = orthonewton;

namespace {

on::KohnSham1D make_model(on::Index ng, on::Index n) {
  on::KohnSham1DParams p;
  p.grid_points = ng;
  p.orbitals = n;
  p.atoms = {{3.0, 4.0, 0.6}, {5.0, 4.0, 0.6}};
  return on::KohnSham1D(p);
}

}  // namespace

static void BM_KsValue(benchmark::State& state) {
  const auto model = make_model(state.range(0), 4);
  const auto u = on::StiefelPoint::orthonormalized(bench::gaussian(state.range(0), 4, 1));
  for (auto _ : state) benchmark::DoNotOptimize(model.value(u.matrix()));
}
BENCHMARK(BM_KsValue)->Arg(64)->Arg(512);

static void BM_KsGrassmannGrad(benchmark::State& state) {
  const auto model = make_model(state.range(0), 4);
  const auto u = on::StiefelPoint::orthonormalized(bench::gaussian(state.range(0), 4, 1));
  for (auto _ : state) benchmark::DoNotOptimize(on::grassmann_grad(model, u));
}
BENCHMARK(BM_KsGrassmannGrad)->Arg(64)->Arg(512);

static void BM_KsHessApply(benchmark::State& state, on::HessianMode mode) {
  const auto model = make_model(state.range(0), 4);
  const auto u = on::StiefelPoint::orthonormalized(bench::gaussian(state.range(0), 4, 1));
  const on::LocalDerivatives local(model, u, mode);
  const auto d = bench::tangent(u, 2);
  for (auto _ : state) benchmark::DoNotOptimize(local.hess_apply(d.matrix()));
}
BENCHMARK_CAPTURE(BM_KsHessApply, exact, on::HessianMode::exact)->Arg(64)->Arg(512);
BENCHMARK_CAPTURE(BM_KsHessApply, approx, on::HessianMode::approx)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
