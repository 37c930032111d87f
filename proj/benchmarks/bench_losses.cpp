#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "selcal/csf.hpp"
#include "selcal/losses.hpp"
#include "selcal/rng.hpp"
#include "selcal/types.hpp"

namespace {

struct BatchFixture {
  selcal::ProbBatch probs;
  selcal::LabelBatch labels;
};

BatchFixture make_fixture(std::size_t n, std::size_t k, std::uint64_t seed) {
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
  return {selcal::make_prob_batch(std::move(m)),
          selcal::make_label_batch(std::move(classes), static_cast<int>(k))};
}

void bm_cross_entropy_batch(benchmark::State& state) {
  const BatchFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 21);
  selcal::LossSpec spec;
  spec.kind = selcal::LossKind::CrossEntropy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::evaluate_loss(spec, f.probs, f.labels));
  }
}

void bm_rank_weighted_batch(benchmark::State& state) {
  const BatchFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 22);
  const selcal::SoftRankConfig cfg{0.05};
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::mc_aurc_loss(f.probs, f.labels, selcal::CsfKind::MSP,
                                                  cfg, selcal::make_cross_entropy()));
  }
}

void bm_tradeoff_batch(benchmark::State& state) {
  const BatchFixture f = make_fixture(static_cast<std::size_t>(state.range(0)), 10, 23);
  selcal::LossSpec spec;
  spec.kind = selcal::LossKind::RAurc;
  spec.raurc.lambda = 0.5;
  spec.raurc.csf = selcal::CsfKind::MSP;
  spec.raurc.softrank.epsilon = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(selcal::evaluate_loss(spec, f.probs, f.labels));
  }
}

}  // namespace

BENCHMARK(bm_cross_entropy_batch)->Arg(128)->Arg(1024);
BENCHMARK(bm_rank_weighted_batch)->Arg(128)->Arg(1024);
BENCHMARK(bm_tradeoff_batch)->Arg(128)->Arg(1024);
