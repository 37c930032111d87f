#include "selcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "selcal/core.hpp"
#include "selcal/losses.hpp"
#include "selcal/softrank.hpp"

namespace selcal {

namespace {

struct BinStat {
  std::size_t count = 0;
  double value_sum = 0.0;
  double hit_sum = 0.0;
};

std::size_t equal_width_bin(double value, int m) {
  const auto b = static_cast<long long>(std::floor(value * m));
  return static_cast<std::size_t>(std::clamp<long long>(b, 0, m - 1));
}

// Core of both calibration estimators: sum_b (n_b/n) |mean(hit) - mean(value)|
// over the scheme's bins; empty bins contribute nothing. Bins are visited in
// a fixed ascending order so summation is deterministic.
double binned_l1(std::span<const double> values, std::span<const double> hits,
                 const BinningScheme& scheme) {
  const std::size_t n = values.size();
  std::vector<BinStat> bins;
  switch (scheme.kind) {
    case BinningKind::EqualWidth: {
      if (scheme.m < 1) throw std::invalid_argument("binning: need m >= 1");
      bins.resize(static_cast<std::size_t>(scheme.m));
      for (std::size_t i = 0; i < n; ++i) {
        BinStat& b = bins[equal_width_bin(values[i], scheme.m)];
        ++b.count;
        b.value_sum += values[i];
        b.hit_sum += hits[i];
      }
      break;
    }
    case BinningKind::EqualMass: {
      if (scheme.m < 1) throw std::invalid_argument("binning: need m >= 1");
      const auto m = static_cast<std::size_t>(scheme.m);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      bins.resize(m);
      for (std::size_t b = 0; b < m; ++b) {
        const std::size_t begin = b * n / m;
        const std::size_t end = (b + 1) * n / m;
        for (std::size_t pos = begin; pos < end; ++pos) {
          const std::size_t i = order[pos];
          ++bins[b].count;
          bins[b].value_sum += values[i];
          bins[b].hit_sum += hits[i];
        }
      }
      break;
    }
    case BinningKind::Singleton: {
      std::map<double, BinStat> by_value;
      for (std::size_t i = 0; i < n; ++i) {
        BinStat& b = by_value[values[i]];
        ++b.count;
        b.value_sum += values[i];
        b.hit_sum += hits[i];
      }
      bins.reserve(by_value.size());
      for (const auto& [value, stat] : by_value) bins.push_back(stat);
      break;
    }
  }
  double total = 0.0;
  for (const BinStat& b : bins) {
    if (b.count == 0) continue;
    const double cnt = static_cast<double>(b.count);
    total += (cnt / static_cast<double>(n)) * std::abs(b.hit_sum / cnt - b.value_sum / cnt);
  }
  return total;
}

void check_pair(std::span<const double> losses, std::span<const double> scores) {
  if (losses.empty()) throw std::invalid_argument("selective risk: empty input");
  if (losses.size() != scores.size())
    throw std::invalid_argument("selective risk: losses and scores differ in length");
}

std::vector<double> confidences(const ProbBatch& p) {
  std::vector<double> conf(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) conf[i] = p.values.row(i)[argmax_row(p.values.row(i))];
  return conf;
}

std::vector<double> correctness(const ProbBatch& p, const LabelBatch& labels) {
  std::vector<double> hit(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    hit[i] = static_cast<int>(argmax_row(p.values.row(i))) == labels.classes[i] ? 1.0 : 0.0;
  return hit;
}

}  // namespace

BinningKind parse_binning(const std::string& name) {
  if (name == "ew") return BinningKind::EqualWidth;
  if (name == "em") return BinningKind::EqualMass;
  if (name == "singleton") return BinningKind::Singleton;
  throw std::invalid_argument("unknown binning '" + name + "' (expected ew|em|singleton)");
}

std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const double> losses,
                                                   std::span<const double> scores) {
  check_pair(losses, scores);
  const std::size_t n = losses.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RiskCoveragePoint> points(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += losses[order[i]];
    points[i].coverage = static_cast<double>(i + 1) / static_cast<double>(n);
    points[i].selective_risk = running / static_cast<double>(i + 1);
  }
  return points;
}

double aurc_curve(std::span<const double> losses, std::span<const double> scores) {
  const auto points = risk_coverage_curve(losses, scores);
  double total = 0.0;
  for (const auto& pt : points) total += pt.selective_risk;
  return total / static_cast<double>(points.size());
}

double mc_aurc(std::span<const double> losses, std::span<const double> scores) {
  check_pair(losses, scores);
  const std::vector<int> ranks = hard_rank_ascending(scores);
  const double np1 = static_cast<double>(losses.size()) + 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i)
    total += aurc_weight(static_cast<double>(ranks[i]) / np1) * losses[i];
  return total / static_cast<double>(losses.size());
}

double binned_ece(const ProbBatch& p, const LabelBatch& labels, const BinningScheme& scheme) {
  if (p.size() != labels.size()) throw std::invalid_argument("binned_ece: batch sizes differ");
  return binned_l1(confidences(p), correctness(p, labels), scheme);
}

double binned_cwece(const ProbBatch& p, const LabelBatch& labels, const BinningScheme& scheme) {
  if (p.size() != labels.size()) throw std::invalid_argument("binned_cwece: batch sizes differ");
  const std::size_t k = p.num_classes();
  std::vector<double> values(p.size());
  std::vector<double> hits(p.size());
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      values[i] = p.values(i, c);
      hits[i] = labels.classes[i] == static_cast<int>(c) ? 1.0 : 0.0;
    }
    total += binned_l1(values, hits, scheme);
  }
  return total / static_cast<double>(k);
}

SupBoundsReport sup_binning_bounds_check(const ProbBatch& p, const LabelBatch& labels) {
  const BinningScheme singleton{BinningKind::Singleton, 1};
  SupBoundsReport r;
  r.sup_ece = binned_ece(p, labels, singleton);
  r.sup_cwece = binned_cwece(p, labels, singleton);
  const double err = empirical_error(p, labels);
  r.bound = err / static_cast<double>(p.num_classes());
  r.ece_pass = r.sup_ece >= r.bound - 1e-12;
  r.cwece_pass = err == 0.0 || r.sup_cwece > r.bound - 1e-12;
  return r;
}

double brier(const ProbBatch& p, const LabelBatch& labels) {
  if (p.size() != labels.size()) throw std::invalid_argument("brier: batch sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t c = 0; c < p.num_classes(); ++c) {
      const double d = p.values(i, c) - (labels.classes[i] == static_cast<int>(c) ? 1.0 : 0.0);
      total += d * d;
    }
  }
  return total / static_cast<double>(p.size());
}

ReliabilityBins reliability_bins(const ProbBatch& p, const LabelBatch& labels, int m) {
  if (m < 1) throw std::invalid_argument("reliability_bins: need m >= 1");
  if (p.size() != labels.size())
    throw std::invalid_argument("reliability_bins: batch sizes differ");
  const std::vector<double> conf = confidences(p);
  const std::vector<double> hit = correctness(p, labels);
  std::vector<BinStat> stats(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < conf.size(); ++i) {
    BinStat& b = stats[equal_width_bin(conf[i], m)];
    ++b.count;
    b.value_sum += conf[i];
    b.hit_sum += hit[i];
  }
  ReliabilityBins out;
  out.bins.resize(stats.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t b = 0; b < stats.size(); ++b) {
    out.bins[b].lo = static_cast<double>(b) / m;
    out.bins[b].hi = static_cast<double>(b + 1) / m;
    out.bins[b].count = stats[b].count;
    if (stats[b].count == 0) {
      out.bins[b].conf = nan;
      out.bins[b].acc = nan;
    } else {
      out.bins[b].conf = stats[b].value_sum / static_cast<double>(stats[b].count);
      out.bins[b].acc = stats[b].hit_sum / static_cast<double>(stats[b].count);
    }
  }
  return out;
}

}  // namespace selcal
