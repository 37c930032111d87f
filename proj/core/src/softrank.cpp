#include "selcal/softrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace selcal {

namespace {

void check_scores(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("rank: empty score vector");
  for (double s : scores)
    if (std::isnan(s)) throw std::invalid_argument("rank: NaN score");
}

std::vector<std::size_t> ascending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace

std::vector<int> hard_rank_ascending(std::span<const double> scores) {
  check_scores(scores);
  const auto order = ascending_order(scores);
  std::vector<int> ranks(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    ranks[order[pos]] = static_cast<int>(pos) + 1;
  return ranks;
}

// The soft rank vector is the Euclidean projection of scores/epsilon onto
// the permutahedron generated by (1, ..., n). After sorting ascending, the
// projection reduces to z - v where v is the nondecreasing isotonic
// regression of t_j = z_j - (j+1); pool-adjacent-violators solves that in
// one pass. Runs of equal fitted v form the blocks reported in the result:
// within a block the ranks are z_j minus the block's mean t, and the
// Jacobian averages over exactly these blocks.
SoftRankResult soft_rank_ascending(std::span<const double> scores, const SoftRankConfig& cfg) {
  check_scores(scores);
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("soft rank: epsilon must be > 0");
  const std::size_t n = scores.size();

  SoftRankResult res;
  res.order = ascending_order(scores);
  res.ranks.resize(n);

  struct Block {
    double sum;         // sum of t over the block
    std::size_t count;
  };
  std::vector<Block> stack;
  stack.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = scores[res.order[j]] / cfg.epsilon - static_cast<double>(j + 1);
    Block blk{t, 1};
    // Merge while the previous block's mean is >= the new one's; counts are
    // positive so the cross-multiplied comparison is division-free.
    while (!stack.empty() && stack.back().sum * static_cast<double>(blk.count) >=
                                 blk.sum * static_cast<double>(stack.back().count)) {
      blk.sum += stack.back().sum;
      blk.count += stack.back().count;
      stack.pop_back();
    }
    stack.push_back(blk);
  }

  std::size_t pos = 0;
  res.blocks.reserve(stack.size());
  for (const Block& blk : stack) {
    const double v = blk.sum / static_cast<double>(blk.count);
    for (std::size_t j = pos; j < pos + blk.count; ++j) {
      const std::size_t i = res.order[j];
      res.ranks[i] = scores[i] / cfg.epsilon - v;
    }
    res.blocks.push_back({pos, pos + blk.count});
    pos += blk.count;
  }
  return res;
}

// In the sorted frame the Jacobian is (1/epsilon) * (I - B) with B the
// symmetric block-averaging operator, so the VJP centers the upstream
// vector within each block. Rows of the Jacobian sum to zero, reflecting
// that a uniform shift of all scores leaves the projection unchanged.
std::vector<double> soft_rank_vjp(std::span<const double> scores, const SoftRankConfig& cfg,
                                  std::span<const double> upstream) {
  if (scores.size() != upstream.size())
    throw std::invalid_argument("soft rank vjp: length mismatch");
  const SoftRankResult sr = soft_rank_ascending(scores, cfg);
  std::vector<double> out(scores.size());
  for (const RankBlock& blk : sr.blocks) {
    double mean = 0.0;
    for (std::size_t j = blk.begin; j < blk.end; ++j) mean += upstream[sr.order[j]];
    mean /= static_cast<double>(blk.end - blk.begin);
    for (std::size_t j = blk.begin; j < blk.end; ++j) {
      const std::size_t i = sr.order[j];
      out[i] = (upstream[i] - mean) / cfg.epsilon;
    }
  }
  return out;
}

std::vector<double> normalized_soft_rank(std::span<const double> scores,
                                         const SoftRankConfig& cfg, std::size_t n_total) {
  if (n_total != scores.size())
    throw std::invalid_argument("normalized soft rank: n_total must equal the score count");
  const SoftRankResult sr = soft_rank_ascending(scores, cfg);
  const double denom = static_cast<double>(n_total + 1);
  std::vector<double> out(sr.ranks.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sr.ranks[i] / denom;
  return out;
}

}  // namespace selcal
