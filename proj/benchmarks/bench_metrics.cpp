#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "selcal/metrics.hpp"
#include "selcal/rng.hpp"
#include "selcal/types.hpp"

namespace {

struct EvalFixture {
  selcal::ProbBatch probs;
  selcal::LabelBatch labels;
  std::vector<double> losses;
  std::vector<double> scores;
};

EvalFixture make_fixture(std::size_t n, std::size_t k, std::uint64_t seed) {
  selcal::Rng rng(seed);
  selcal::Matrix m(n, k);
  std::vector<int> classes(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.row(i);
    double total = 0.0;
    for (double& v : row) {
      v = rng.uniform(0.01, 1.0);
      total += v;
    }
    for (double& v : row) v /= total;
    classes[i] = static_cast<int>(rng.uniform_int(0, static_cast<int>(k) - 1));
  }
  EvalFixture f;
  f.probs = selcal::make_prob_batch(std::move(m));
  f.labels = selcal::make_label_batch(std::move(classes), static_cast<int>(k));
  f.losses.resize(n);
  f.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.losses[i] = rng.uniform(0.0, 2.0);
    f.scores[i] = rng.uniform(0.0, 1.0);
  }
  return f;
}

void bm_binned_ece_ew15(benchmark::State& state) {
  const EvalFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 11);
  const selcal::BinningScheme scheme{selcal::BinningKind::EqualWidth, 15};
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::binned_ece(f.probs, f.labels, scheme));
  }
}

void bm_binned_cwece_ew15(benchmark::State& state) {
  const EvalFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 12);
  const selcal::BinningScheme scheme{selcal::BinningKind::EqualWidth, 15};
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::binned_cwece(f.probs, f.labels, scheme));
  }
}

void bm_binned_ece_singleton(benchmark::State& state) {
  const EvalFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 13);
  const selcal::BinningScheme scheme{selcal::BinningKind::Singleton, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::binned_ece(f.probs, f.labels, scheme));
  }
}

void bm_mc_aurc(benchmark::State& state) {
  const EvalFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 14);
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::mc_aurc(f.losses, f.scores));
  }
}

void bm_aurc_curve(benchmark::State& state) {
  const EvalFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::aurc_curve(f.losses, f.scores));
  }
}

}  // namespace

BENCHMARK(bm_binned_ece_ew15)->Arg(10000);
BENCHMARK(bm_binned_cwece_ew15)->Arg(10000);
BENCHMARK(bm_binned_ece_singleton)->Arg(10000);
BENCHMARK(bm_mc_aurc)->Arg(10000);
BENCHMARK(bm_aurc_curve)->Arg(10000);
