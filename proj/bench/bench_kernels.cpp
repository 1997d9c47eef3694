// Serial reference vs OpenMP kernels. Results are bit-identical (see the
// kernels test suite); only wall time differs.
#include <benchmark/benchmark.h>

#include "m3s/fieldio.hpp"
#include "m3s/transform.hpp"

using namespace m3s;

namespace {

Exec mode(const benchmark::State& st) { return st.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

const RadialField& packet() {
  static const RadialField f = [] {
    SynthParams p;
    p.s0 = 1.3;
    p.j = 1;
    return synthesize("plane-wave-packet", 2, p);
  }();
  return f;
}

void BM_Sample(benchmark::State& st) {
  const auto geom = GridGeometry::centred(25, 0.4);
  for (auto _ : st) benchmark::DoNotOptimize(sample(packet(), geom, mode(st)));
}

void BM_DirectSphericalFT(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(spherical_ft(packet(), 1.7, 1, SftMode::Direct, mode(st)));
}

void BM_Forward(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(forward(packet(), {}, nullptr, mode(st)));
}

void BM_InverseOnGrid(benchmark::State& st) {
  const auto c = forward(packet(), {}, nullptr, Exec::Parallel);
  const auto geom = GridGeometry::centred(17, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(inverse_on_grid(c, geom, mode(st)));
}

void BM_Convolve(benchmark::State& st) {
  const auto geom = GridGeometry::centred(13, 0.6);
  const auto a = sample(synthesize("gaussian", 1), geom);
  const auto b = sample(synthesize("gaussian", 1), geom);
  for (auto _ : st) benchmark::DoNotOptimize(convolve(a, b, mode(st)));
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_Sample)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DirectSphericalFT)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InverseOnGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Convolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
