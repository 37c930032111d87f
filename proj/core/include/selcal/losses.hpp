#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "selcal/csf.hpp"
#include "selcal/softrank.hpp"
#include "selcal/types.hpp"

namespace selcal {

struct FocusConfig {
  double gamma = 0.0;  // focusing strength; must be >= 0
};

struct RAurcConfig {
  double lambda = 0.5;  // 0 = plain mean risk, 1 = pure rank-weighted risk
  CsfKind csf = CsfKind::MSP;
  SoftRankConfig softrank;
};

// Per-sample loss value with its gradient w.r.t. the probability vector.
struct LossGrad {
  double value = 0.0;
  std::vector<double> grad_p;
};

// Whole-batch loss; grad_p rows align with the input batch.
struct BatchLossGrad {
  double value = 0.0;
  Matrix grad_p;
};

using PerSampleLoss = std::function<LossGrad(std::span<const double>, int)>;

LossGrad cross_entropy(std::span<const double> p, int label);
LossGrad focal(std::span<const double> p, int label, const FocusConfig& cfg);
LossGrad inverse_focal(std::span<const double> p, int label, const FocusConfig& cfg);

// Two-regime focal preset: gamma = 5 when the true-class probability is
// below 0.2, gamma = 3 otherwise.
LossGrad focal_53(std::span<const double> p, int label);

// Smallest gamma at which the inverse-focal gradient turns positive
// somewhere on (0,1): min_p (1+p)/(p*ln(1/p)), minimized numerically to 1e-6.
double inverse_focal_critical_gamma();

PerSampleLoss make_cross_entropy();
PerSampleLoss make_focal(FocusConfig cfg);
PerSampleLoss make_inverse_focal(FocusConfig cfg);

// Mean of weights[i]*loss_i with the weights held constant. Building block
// of the rank-weighted loss; with all-ones weights it is the plain mean.
BatchLossGrad weighted_loss(const ProbBatch& p, const LabelBatch& labels,
                            std::span<const double> weights, const PerSampleLoss& base_loss);

// Rank-weighted selective risk: mean of -ln(1 - r_i/(n+1)) * loss_i with
// soft ranks over the CSF scores. The gradient couples the whole batch:
// each row receives its weighted loss gradient plus the rank-sensitivity
// term routed through soft_rank_vjp and the CSF gradient.
BatchLossGrad mc_aurc_loss(const ProbBatch& p, const LabelBatch& labels, CsfKind csf,
                           const SoftRankConfig& softrank_cfg, const PerSampleLoss& base_loss);

// (1-lambda) * mean loss + lambda * rank-weighted loss.
BatchLossGrad r_aurc_loss(const ProbBatch& p, const LabelBatch& labels, const RAurcConfig& cfg,
                          const PerSampleLoss& base_loss);

// Pointwise weight factors as functions of the true-class probability
// (focal, inverse) or of the normalized rank (aurc).
double focal_weight(double p, double gamma);    // (1-p)^gamma
double inverse_weight(double p, double gamma);  // (1+p)^gamma
double aurc_weight(double u);                   // -ln(1-u)

struct WeightCurvePoint {
  double p = 0.0;
  double focal_w = 0.0;
  double inverse_w = 0.0;
  double aurc_w = 0.0;
  double focal_norm = 0.0;
  double inverse_norm = 0.0;
  double aurc_norm = 0.0;
};

// Raw and max-normalized weight curves over a grid strictly inside (0,1).
std::vector<WeightCurvePoint> weight_curves(double gamma, std::span<const double> grid);

// Loss selection shared by the trainer and the CLI.
enum class LossKind { CrossEntropy, Focal, InverseFocal, Aurc, RAurc };

// Accepts the CLI spellings xe | focal | invfocal | aurc | raurc.
LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);

struct LossSpec {
  LossKind kind = LossKind::CrossEntropy;
  double gamma = 0.0;  // focal / inverse focal only
  RAurcConfig raurc;   // lambda, CSF and epsilon for the rank-weighted kinds
};

// Batch loss + gradient w.r.t. probabilities for the configured objective.
// The base loss inside the rank-weighted kinds is cross-entropy.
BatchLossGrad evaluate_loss(const LossSpec& spec, const ProbBatch& p, const LabelBatch& labels);

}  // namespace selcal
