#include "selcal/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "selcal/core.hpp"

namespace selcal {

namespace {

void check_label(std::span<const double> p, int label, const char* what) {
  if (label < 0 || static_cast<std::size_t>(label) >= p.size())
    throw std::invalid_argument(std::string(what) + ": label out of range");
}

void check_gamma(const FocusConfig& cfg) {
  if (!(cfg.gamma >= 0.0)) throw std::invalid_argument("focusing gamma must be >= 0");
}

void check_batch(const ProbBatch& p, const LabelBatch& labels, const char* what) {
  if (p.size() == 0) throw std::invalid_argument(std::string(what) + ": empty batch");
  if (p.size() != labels.size())
    throw std::invalid_argument(std::string(what) + ": batch sizes differ");
}

}  // namespace

LossGrad cross_entropy(std::span<const double> p, int label) {
  check_label(p, label, "cross_entropy");
  const double pc = clamp_prob(p[static_cast<std::size_t>(label)]);
  LossGrad out;
  out.value = -std::log(pc);
  out.grad_p.assign(p.size(), 0.0);
  out.grad_p[static_cast<std::size_t>(label)] = -1.0 / pc;
  return out;
}

LossGrad focal(std::span<const double> p, int label, const FocusConfig& cfg) {
  check_gamma(cfg);
  if (cfg.gamma == 0.0) return cross_entropy(p, label);
  check_label(p, label, "focal");
  const double pc = clamp_prob(p[static_cast<std::size_t>(label)]);
  const double q = 1.0 - pc;
  const double logp = std::log(pc);
  LossGrad out;
  out.grad_p.assign(p.size(), 0.0);
  if (q <= 0.0) {
    // p = 1 exactly: weight and gradient both vanish for gamma > 0.
    out.value = 0.0;
    return out;
  }
  out.value = -std::pow(q, cfg.gamma) * logp;
  out.grad_p[static_cast<std::size_t>(label)] =
      cfg.gamma * std::pow(q, cfg.gamma - 1.0) * logp - std::pow(q, cfg.gamma) / pc;
  return out;
}

LossGrad inverse_focal(std::span<const double> p, int label, const FocusConfig& cfg) {
  check_gamma(cfg);
  if (cfg.gamma == 0.0) return cross_entropy(p, label);
  check_label(p, label, "inverse_focal");
  const double pc = clamp_prob(p[static_cast<std::size_t>(label)]);
  const double a = 1.0 + pc;
  const double logp = std::log(pc);
  LossGrad out;
  out.value = -std::pow(a, cfg.gamma) * logp;
  out.grad_p.assign(p.size(), 0.0);
  out.grad_p[static_cast<std::size_t>(label)] =
      -cfg.gamma * std::pow(a, cfg.gamma - 1.0) * logp - std::pow(a, cfg.gamma) / pc;
  return out;
}

LossGrad focal_53(std::span<const double> p, int label) {
  check_label(p, label, "focal_53");
  const double pc = p[static_cast<std::size_t>(label)];
  return focal(p, label, {pc < 0.2 ? 5.0 : 3.0});
}

// Minimizes h(p) = (1+p)/(p*ln(1/p)) on (0,1): coarse grid bracket, then
// golden-section refinement. h diverges at both endpoints, so the interior
// minimum is well separated.
double inverse_focal_critical_gamma() {
  const auto h = [](double p) { return (1.0 + p) / (p * std::log(1.0 / p)); };
  const int grid = 10000;
  double best_p = 0.5;
  double best_h = std::numeric_limits<double>::infinity();
  for (int i = 1; i < grid; ++i) {
    const double p = static_cast<double>(i) / grid;
    const double v = h(p);
    if (v < best_h) {
      best_h = v;
      best_p = p;
    }
  }
  double lo = std::max(best_p - 1.0 / grid, 1e-9);
  double hi = std::min(best_p + 1.0 / grid, 1.0 - 1e-9);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo);
  double b = lo + phi * (hi - lo);
  double ha = h(a);
  double hb = h(b);
  while (hi - lo > 1e-10) {
    if (ha < hb) {
      hi = b;
      b = a;
      hb = ha;
      a = hi - phi * (hi - lo);
      ha = h(a);
    } else {
      lo = a;
      a = b;
      ha = hb;
      b = lo + phi * (hi - lo);
      hb = h(b);
    }
  }
  return h(0.5 * (lo + hi));
}

PerSampleLoss make_cross_entropy() {
  return [](std::span<const double> p, int label) { return cross_entropy(p, label); };
}

PerSampleLoss make_focal(FocusConfig cfg) {
  check_gamma(cfg);
  return [cfg](std::span<const double> p, int label) { return focal(p, label, cfg); };
}

PerSampleLoss make_inverse_focal(FocusConfig cfg) {
  check_gamma(cfg);
  return [cfg](std::span<const double> p, int label) { return inverse_focal(p, label, cfg); };
}

BatchLossGrad weighted_loss(const ProbBatch& p, const LabelBatch& labels,
                            std::span<const double> weights, const PerSampleLoss& base_loss) {
  check_batch(p, labels, "weighted_loss");
  if (weights.size() != p.size())
    throw std::invalid_argument("weighted_loss: one weight per sample required");
  const std::size_t n = p.size();
  BatchLossGrad out;
  out.grad_p = Matrix(n, p.num_classes(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const LossGrad lg = base_loss(p.values.row(i), labels.classes[i]);
    out.value += weights[i] * lg.value;
    for (std::size_t j = 0; j < p.num_classes(); ++j)
      out.grad_p(i, j) = weights[i] * lg.grad_p[j] / static_cast<double>(n);
  }
  out.value /= static_cast<double>(n);
  return out;
}

BatchLossGrad mc_aurc_loss(const ProbBatch& p, const LabelBatch& labels, CsfKind csf,
                           const SoftRankConfig& softrank_cfg, const PerSampleLoss& base_loss) {
  check_batch(p, labels, "mc_aurc_loss");
  const std::size_t n = p.size();
  const std::size_t k = p.num_classes();
  const double nd = static_cast<double>(n);

  std::vector<LossGrad> per_sample(n);
  std::vector<double> loss_values(n);
  for (std::size_t i = 0; i < n; ++i) {
    per_sample[i] = base_loss(p.values.row(i), labels.classes[i]);
    loss_values[i] = per_sample[i].value;
  }

  const std::vector<double> scores = csf_scores(csf, p, loss_values);
  const SoftRankResult sr = soft_rank_ascending(scores, softrank_cfg);

  BatchLossGrad out;
  out.grad_p = Matrix(n, k, 0.0);

  // Weighted-loss half: value and the loss-side gradient term.
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = aurc_weight(sr.ranks[i] / (nd + 1.0));
    out.value += weight[i] * loss_values[i];
    for (std::size_t j = 0; j < k; ++j)
      out.grad_p(i, j) = weight[i] * per_sample[i].grad_p[j] / nd;
  }
  out.value /= nd;

  // Rank-sensitivity half: dL/drank_i = loss_i / (n+1-rank_i) up to 1/n,
  // pulled back through the rank Jacobian, then through the score gradient.
  std::vector<double> upstream(n);
  for (std::size_t i = 0; i < n; ++i)
    upstream[i] = loss_values[i] / (nd + 1.0 - sr.ranks[i]);
  const std::vector<double> score_grad = soft_rank_vjp(scores, softrank_cfg, upstream);

  for (std::size_t i = 0; i < n; ++i) {
    if (score_grad[i] == 0.0) continue;
    if (csf == CsfKind::NegLossOracle) {
      // score = -loss, so the score gradient is the negated loss gradient.
      for (std::size_t j = 0; j < k; ++j)
        out.grad_p(i, j) -= score_grad[i] * per_sample[i].grad_p[j] / nd;
    } else {
      const std::vector<double> g = csf_gradient(csf, p.values.row(i));
      for (std::size_t j = 0; j < k; ++j)
        out.grad_p(i, j) += score_grad[i] * g[j] / nd;
    }
  }
  return out;
}

BatchLossGrad r_aurc_loss(const ProbBatch& p, const LabelBatch& labels, const RAurcConfig& cfg,
                          const PerSampleLoss& base_loss) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
    throw std::invalid_argument("r_aurc_loss: lambda must be in [0,1]");
  check_batch(p, labels, "r_aurc_loss");
  const std::vector<double> ones(p.size(), 1.0);
  // Exact boundary routing keeps lambda = 0 bitwise identical to the plain
  // mean objective and lambda = 1 to the pure rank-weighted one.
  if (cfg.lambda == 0.0) return weighted_loss(p, labels, ones, base_loss);
  if (cfg.lambda == 1.0) return mc_aurc_loss(p, labels, cfg.csf, cfg.softrank, base_loss);

  const BatchLossGrad mean_part = weighted_loss(p, labels, ones, base_loss);
  const BatchLossGrad aurc_part = mc_aurc_loss(p, labels, cfg.csf, cfg.softrank, base_loss);
  BatchLossGrad out;
  out.value = (1.0 - cfg.lambda) * mean_part.value + cfg.lambda * aurc_part.value;
  out.grad_p = Matrix(p.size(), p.num_classes());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.num_classes(); ++j)
      out.grad_p(i, j) = (1.0 - cfg.lambda) * mean_part.grad_p(i, j) +
                         cfg.lambda * aurc_part.grad_p(i, j);
  return out;
}

double focal_weight(double p, double gamma) { return std::pow(1.0 - p, gamma); }

double inverse_weight(double p, double gamma) { return std::pow(1.0 + p, gamma); }

double aurc_weight(double u) { return -std::log1p(-u); }

std::vector<WeightCurvePoint> weight_curves(double gamma, std::span<const double> grid) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("weight_curves: gamma must be >= 0");
  std::vector<WeightCurvePoint> out;
  out.reserve(grid.size());
  double max_focal = 0.0;
  double max_inverse = 0.0;
  double max_aurc = 0.0;
  for (double p : grid) {
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("weight_curves: grid must lie strictly inside (0,1)");
    WeightCurvePoint pt;
    pt.p = p;
    pt.focal_w = focal_weight(p, gamma);
    pt.inverse_w = inverse_weight(p, gamma);
    pt.aurc_w = aurc_weight(p);
    max_focal = std::max(max_focal, pt.focal_w);
    max_inverse = std::max(max_inverse, pt.inverse_w);
    max_aurc = std::max(max_aurc, pt.aurc_w);
    out.push_back(pt);
  }
  for (WeightCurvePoint& pt : out) {
    pt.focal_norm = max_focal > 0.0 ? pt.focal_w / max_focal : 0.0;
    pt.inverse_norm = max_inverse > 0.0 ? pt.inverse_w / max_inverse : 0.0;
    pt.aurc_norm = max_aurc > 0.0 ? pt.aurc_w / max_aurc : 0.0;
  }
  return out;
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "xe") return LossKind::CrossEntropy;
  if (name == "focal") return LossKind::Focal;
  if (name == "invfocal") return LossKind::InverseFocal;
  if (name == "aurc") return LossKind::Aurc;
  if (name == "raurc") return LossKind::RAurc;
  throw std::invalid_argument("unknown loss '" + name +
                              "' (expected xe|focal|invfocal|aurc|raurc)");
}

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::CrossEntropy: return "xe";
    case LossKind::Focal: return "focal";
    case LossKind::InverseFocal: return "invfocal";
    case LossKind::Aurc: return "aurc";
    case LossKind::RAurc: return "raurc";
  }
  throw std::logic_error("unreachable");
}

BatchLossGrad evaluate_loss(const LossSpec& spec, const ProbBatch& p, const LabelBatch& labels) {
  const std::vector<double> ones(p.size(), 1.0);
  switch (spec.kind) {
    case LossKind::CrossEntropy:
      return weighted_loss(p, labels, ones, make_cross_entropy());
    case LossKind::Focal:
      return weighted_loss(p, labels, ones, make_focal({spec.gamma}));
    case LossKind::InverseFocal:
      return weighted_loss(p, labels, ones, make_inverse_focal({spec.gamma}));
    case LossKind::Aurc:
      return mc_aurc_loss(p, labels, spec.raurc.csf, spec.raurc.softrank, make_cross_entropy());
    case LossKind::RAurc:
      return r_aurc_loss(p, labels, spec.raurc, make_cross_entropy());
  }
  throw std::logic_error("unreachable");
}

}  // namespace selcal
