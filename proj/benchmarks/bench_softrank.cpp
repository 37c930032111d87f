#include <benchmark/benchmark.h>

#include <vector>

#include "selcal/rng.hpp"
#include "selcal/softrank.hpp"

namespace {

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
  selcal::Rng rng(seed);
  std::vector<double> scores(n);
  for (double& s : scores) s = rng.uniform(-1.0, 1.0);
  return scores;
}

void bm_soft_rank(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> scores = random_scores(n, 1);
  const selcal::SoftRankConfig cfg{0.05};
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::soft_rank_ascending(scores, cfg));
  }
  state.SetComplexityN(state.range(0));
}

void bm_soft_rank_vjp(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> scores = random_scores(n, 2);
  const std::vector<double> upstream = random_scores(n, 3);
  const selcal::SoftRankConfig cfg{0.05};
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::soft_rank_vjp(scores, cfg, upstream));
  }
  state.SetComplexityN(state.range(0));
}

void bm_hard_rank(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> scores = random_scores(n, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::hard_rank_ascending(scores));
  }
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(bm_soft_rank)->Arg(128)->Arg(1024)->Arg(8192)->Complexity(benchmark::oNLogN);
BENCHMARK(bm_soft_rank_vjp)->Arg(128)->Arg(1024)->Arg(8192)->Complexity(benchmark::oNLogN);
BENCHMARK(bm_hard_rank)->Arg(128)->Arg(1024)->Arg(8192)->Complexity(benchmark::oNLogN);
