#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "orthonewton/retractions.hpp"

namespace on = orthonewton;

static void BM_Retract(benchmark::State& state, on::RetractionKind kind) {
  const auto ng = state.range(0);
  const auto n = state.range(1);
  const auto u = on::StiefelPoint::orthonormalized(bench::gaussian(ng, n, 1));
  const auto d = bench::tangent(u, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(on::retract(kind, u, d, 0.3));
  }
}

#define RETRACTION_BENCH(label, kind)                                                 \
  BENCHMARK_CAPTURE(BM_Retract, label, kind)->Args({64, 4})->Args({256, 8})->Args({1024, 16})

RETRACTION_BENCH(qr, on::RetractionKind::qr());
RETRACTION_BENCH(pd, on::RetractionKind::pd());
RETRACTION_BENCH(wy, on::RetractionKind::wy());
RETRACTION_BENCH(ga_pade3, on::RetractionKind::ga_pade(3));
RETRACTION_BENCH(geodesic, on::RetractionKind::geodesic());

static void BM_GeodesicTransport(benchmark::State& state) {
  const auto u = on::StiefelPoint::orthonormalized(bench::gaussian(state.range(0), 8, 3));
  const on::GeodesicPath path(bench::tangent(u, 4));
  const auto x = bench::tangent(u, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(path.transport(0.4, x));
  }
}
BENCHMARK(BM_GeodesicTransport)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
