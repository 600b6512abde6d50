#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "sio/forms.hpp"
#include "sio/generators.hpp"
#include "sio/kernels.hpp"
#include "sio/mollifiers.hpp"
#include "sio/splitter.hpp"

namespace {

void BM_SchurBoundGaussian(benchmark::State& state) {
  const auto m = sio::gaussian_mollifier(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sio::schur_bound(m).bound);
}
BENCHMARK(BM_SchurBoundGaussian)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_OperatorNorm(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mu = sio::random_atoms(n, 2, 0.0, 1.0, rng);
  const auto nu = sio::random_atoms(n, 2, 0.0, 1.0, rng);
  const auto k = sio::materialize(sio::make_cauchy(), mu, nu);
  for (auto _ : state) benchmark::DoNotOptimize(sio::operator_norm_p2(k, mu, nu).value);
}
BENCHMARK(BM_OperatorNorm)->RangeMultiplier(4)->Range(16, 512)->Unit(benchmark::kMillisecond);

void BM_BuildPartition(benchmark::State& state) {
  const auto sigma = sio::lebesgue_grid(1, 0.0, 1.0, std::ldexp(1.0, -14));
  for (auto _ : state) benchmark::DoNotOptimize(sio::build_partition(sigma, static_cast<int>(state.range(0))).separation);
}
BENCHMARK(BM_BuildPartition)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_RestrictedExact(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto all = sio::random_atoms(n, 1, 0.0, 1.0, rng);
  const auto k = sio::materialize_masked(sio::make_hilbert(), all, all);
  for (auto _ : state) benchmark::DoNotOptimize(sio::restricted_norm_exact(k, all, all).value);
}
BENCHMARK(BM_RestrictedExact)->DenseRange(6, 12, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
