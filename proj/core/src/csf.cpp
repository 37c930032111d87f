#include "selcal/csf.hpp"

#include <stdexcept>
#include <utility>

#include "selcal/core.hpp"

namespace selcal {

namespace {

// Argmax plus the best index among the rest, both resolving ties toward the
// smallest index.
std::pair<std::size_t, std::size_t> top_two(std::span<const double> p) {
  if (p.size() < 2) throw std::invalid_argument("csf: need at least two classes");
  const std::size_t top = argmax_row(p);
  std::size_t second = top == 0 ? 1 : 0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != top && p[j] > p[second]) second = j;
  return {top, second};
}

}  // namespace

CsfKind parse_csf(const std::string& name) {
  if (name == "msp") return CsfKind::MSP;
  if (name == "margin") return CsfKind::SoftmaxMargin;
  if (name == "negentropy") return CsfKind::NegativeEntropy;
  throw std::invalid_argument("unknown csf '" + name + "' (expected msp|margin|negentropy)");
}

std::string csf_name(CsfKind kind) {
  switch (kind) {
    case CsfKind::MSP: return "msp";
    case CsfKind::SoftmaxMargin: return "margin";
    case CsfKind::NegativeEntropy: return "negentropy";
    case CsfKind::NegLossOracle: return "neg-loss-oracle";
  }
  throw std::logic_error("unreachable");
}

double csf_score(CsfKind kind, std::span<const double> p, std::optional<double> loss_opt) {
  switch (kind) {
    case CsfKind::MSP:
      return p[argmax_row(p)];
    case CsfKind::SoftmaxMargin: {
      const auto [top, second] = top_two(p);
      return p[top] - p[second];
    }
    case CsfKind::NegativeEntropy: {
      double s = 0.0;
      for (double v : p) s += v * clamped_log(v);
      return s;
    }
    case CsfKind::NegLossOracle:
      if (!loss_opt) throw std::invalid_argument("NegLossOracle needs a loss value");
      return -*loss_opt;
  }
  throw std::logic_error("unreachable");
}

std::vector<double> csf_gradient(CsfKind kind, std::span<const double> p) {
  std::vector<double> g(p.size(), 0.0);
  switch (kind) {
    case CsfKind::MSP:
      g[argmax_row(p)] = 1.0;
      return g;
    case CsfKind::SoftmaxMargin: {
      const auto [top, second] = top_two(p);
      g[top] = 1.0;
      g[second] = -1.0;
      return g;
    }
    case CsfKind::NegativeEntropy: {
      for (std::size_t j = 0; j < p.size(); ++j) g[j] = clamped_log(p[j]) + 1.0;
      return g;
    }
    case CsfKind::NegLossOracle:
      throw std::invalid_argument("NegLossOracle has no probability gradient");
  }
  throw std::logic_error("unreachable");
}

std::vector<double> csf_scores(CsfKind kind, const ProbBatch& p,
                               std::span<const double> per_sample_loss) {
  std::vector<double> scores(p.size());
  if (kind == CsfKind::NegLossOracle) {
    if (per_sample_loss.size() != p.size())
      throw std::invalid_argument("NegLossOracle needs one loss per sample");
    for (std::size_t i = 0; i < p.size(); ++i) scores[i] = -per_sample_loss[i];
    return scores;
  }
  for (std::size_t i = 0; i < p.size(); ++i) scores[i] = csf_score(kind, p.values.row(i));
  return scores;
}

}  // namespace selcal
