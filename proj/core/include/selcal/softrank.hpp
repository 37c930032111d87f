#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace selcal {

struct SoftRankConfig {
  double epsilon = 0.05;  // regularization strength; must be > 0
};

// Contiguous run of sorted positions sharing one fitted value.
struct RankBlock {
  std::size_t begin = 0;  // first sorted position
  std::size_t end = 0;    // one past the last
};

struct SoftRankResult {
  std::vector<double> ranks;       // soft ascending ranks, original order
  std::vector<RankBlock> blocks;   // tied groups over sorted positions
  std::vector<std::size_t> order;  // order[j] = original index at sorted position j
};

// Ranks 1..n by ascending score; ties keep original order, so the result is
// always a permutation.
std::vector<int> hard_rank_ascending(std::span<const double> scores);

// Euclidean projection of scores/epsilon onto the permutahedron generated
// by (1, ..., n). Converges to hard ranks as epsilon -> 0 and to the
// centroid (n+1)/2 as epsilon -> inf.
SoftRankResult soft_rank_ascending(std::span<const double> scores, const SoftRankConfig& cfg);

// upstream^T * d(ranks)/d(scores). The Jacobian acts per sorted block as
// (1/epsilon) * (I - block averaging), so this costs O(n) past the sort.
std::vector<double> soft_rank_vjp(std::span<const double> scores, const SoftRankConfig& cfg,
                                  std::span<const double> upstream);

// ranks / (n+1), strictly inside (0,1). n_total must equal the score count;
// the parameter exists so callers state the normalization base explicitly.
std::vector<double> normalized_soft_rank(std::span<const double> scores,
                                         const SoftRankConfig& cfg, std::size_t n_total);

}  // namespace selcal
