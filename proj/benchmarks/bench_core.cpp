#include <benchmark/benchmark.h>

#include "envar/collapse.hpp"
#include "envar/envariance.hpp"
#include "envar/linalg.hpp"

using namespace envar;

static void BM_Schmidt(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const StateVector psi = random_state(Dims{d, d}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(schmidt(psi, {d, d}));
}
BENCHMARK(BM_Schmidt)->RangeMultiplier(2)->Range(2, 64);

static void BM_PartialTrace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const StateVector psi = random_state(Dims(n, 2), 2);
  const std::size_t keep[] = {0, n / 2, n - 1};
  for (auto _ : state) benchmark::DoNotOptimize(partial_trace(psi, keep));
}
BENCHMARK(BM_PartialTrace)->DenseRange(4, 12, 2);

static void BM_DarwinismCurve(benchmark::State& state) {
  const collapse::BranchingState s =
      collapse::premeasure_imperfect(random_state(2, 3), static_cast<std::size_t>(state.range(0)), 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(collapse::darwinism_curve(s, 64, 4));
}
BENCHMARK(BM_DarwinismCurve)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

static void BM_PairEquivalent(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const JointPairState x(random_state(Dims{d, d}, 5));
  const JointPairState y = related_state(x, 6);
  for (auto _ : state) benchmark::DoNotOptimize(pair_equivalent(x, y, 4, 7));
}
BENCHMARK(BM_PairEquivalent)->RangeMultiplier(2)->Range(2, 32);

static void BM_Born(benchmark::State& state) {
  const auto k = static_cast<std::int64_t>(state.range(0));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 1);
  counts.back() = 12 - (k - 1);
  for (auto _ : state) benchmark::DoNotOptimize(collapse::born_from_envariance(collapse::RationalWeights(counts, 12)));
}
BENCHMARK(BM_Born)->DenseRange(1, 6)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
