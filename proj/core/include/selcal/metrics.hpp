#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "selcal/types.hpp"

namespace selcal {

enum class BinningKind { EqualWidth, EqualMass, Singleton };

struct BinningScheme {
  BinningKind kind = BinningKind::EqualWidth;
  int m = 15;  // bin count; ignored for Singleton
};

// Accepts the CLI spellings ew | em | singleton.
BinningKind parse_binning(const std::string& name);

struct RiskCoveragePoint {
  double coverage = 0.0;        // i/n
  double selective_risk = 0.0;  // mean loss over the i highest-score samples
};

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double conf = 0.0;  // NaN when count == 0
  double acc = 0.0;   // NaN when count == 0
};

struct ReliabilityBins {
  std::vector<ReliabilityBin> bins;
};

struct SupBoundsReport {
  double sup_ece = 0.0;
  double sup_cwece = 0.0;
  double bound = 0.0;  // empirical error / k
  bool ece_pass = false;
  bool cwece_pass = false;
};

// Selective risk at every coverage i/n, accepting samples by descending
// score (ties keep original order).
std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const double> losses,
                                                   std::span<const double> scores);

// Unweighted mean of the n selective risks.
double aurc_curve(std::span<const double> losses, std::span<const double> scores);

// Rank-weighted estimator: mean of -ln(1 - r_i/(n+1)) * loss_i over hard
// ascending score ranks.
double mc_aurc(std::span<const double> losses, std::span<const double> scores);

// Top-label calibration error: sum_b (n_b/n) |acc_b - conf_b| with bins over
// the max probability. Singleton puts each distinct value in its own bin.
double binned_ece(const ProbBatch& p, const LabelBatch& labels, const BinningScheme& scheme);

// Class-wise variant: bins per class over that class's probability, averaged
// over classes.
double binned_cwece(const ProbBatch& p, const LabelBatch& labels, const BinningScheme& scheme);

// Singleton-scheme ECE/cwECE against the error-rate lower bound err/k.
SupBoundsReport sup_binning_bounds_check(const ProbBatch& p, const LabelBatch& labels);

// Mean squared distance between probability rows and one-hot labels.
double brier(const ProbBatch& p, const LabelBatch& labels);

// Equal-width reliability-diagram data over top-label confidence.
ReliabilityBins reliability_bins(const ProbBatch& p, const LabelBatch& labels, int m);

}  // namespace selcal
