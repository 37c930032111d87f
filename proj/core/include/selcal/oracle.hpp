#pragma once

#include <cstdint>
#include <vector>

#include "selcal/rng.hpp"
#include "selcal/types.hpp"

namespace selcal {

// Finite distribution with known ground truth: M feature atoms with masses
// px and exact class posteriors per atom. Population quantities below are
// computed by exact enumeration, no estimation involved.
struct DiscreteDistribution {
  std::vector<double> px;  // M masses summing to 1 within 1e-12
  Matrix posterior;        // M x k, rows on the simplex
};

// A model tabulated on the same atoms.
struct TableModel {
  Matrix preds;  // M x k, rows on the simplex
};

// Isotropic Gaussian mixture for synthetic datasets.
struct MixtureSpec {
  int k = 3;
  int d = 2;
  Matrix means;                // k x d
  double variance = 1.0;       // shared isotropic; must be > 0
  std::vector<double> priors;  // k entries on the simplex
  std::uint64_t seed = 0;
};

struct MixtureSample {
  Matrix features;      // n x d
  LabelBatch labels;
  ProbBatch posterior;  // exact P(y | x) per sample
};

// L_rho calibration error with E[y | f(x)] taken over groups of atoms whose
// prediction rows are exactly equal. rho must be 1 or 2.
double population_ce_rho(const DiscreteDistribution& dist, const TableModel& model, int rho);

double population_top_ece(const DiscreteDistribution& dist, const TableModel& model);
double population_cwece(const DiscreteDistribution& dist, const TableModel& model);
double population_brier(const DiscreteDistribution& dist, const TableModel& model);

// E[sum_c Var(y_c | f)] under the same grouping; together with CE_2 this
// reconstructs the Brier score exactly: brier = ce2^2 + this.
double population_posterior_variance(const DiscreteDistribution& dist, const TableModel& model);

// Closed-form population selective-risk areas for scores uniform on (0,1).
struct AurcProfile {
  enum class Kind { ConstantLoss, LinearLoss } kind = Kind::ConstantLoss;
  double c = 1.0;  // constant loss level; unused for LinearLoss
};

// ConstantLoss(c) -> c; LinearLoss (loss = 1-u) -> 1/4.
double population_aurc_closed_form(const AurcProfile& profile);

// Draws (losses, scores) from a profile for estimator-consistency runs.
void sample_aurc_profile(const AurcProfile& profile, std::size_t n, Rng& rng,
                         std::vector<double>& losses, std::vector<double>& scores);

struct AurcBoundReport {
  double lhs = 0.0;  // rank-weighted risk under the loss-aligned score
  double rhs = 0.0;  // n*ln2/(2(n+1))*err^2 + ln2/(2(n+1))*err
  bool pass = false;
};

// Lower bound on the empirical rank-weighted risk when scores are perfectly
// aligned with the cross-entropy loss (score = -loss).
AurcBoundReport aurc_lower_bound_check(const ProbBatch& p, const LabelBatch& labels);

// Samples n points i.i.d. from the mixture along with exact posteriors.
MixtureSample gen_mixture(const MixtureSpec& spec, std::size_t n);

// Means evenly spaced on a circle of the given radius in the first two
// dimensions (spread along the axis when d == 1), uniform priors.
MixtureSpec ring_mixture_spec(int k, int d, double radius, double variance, std::uint64_t seed);

}  // namespace selcal
