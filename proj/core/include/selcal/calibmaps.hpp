#pragma once

#include <span>

#include "selcal/types.hpp"

namespace selcal {

struct Threshold {
  double tau = 0.5;
};

struct Temperature {
  double t = 1.0;  // must be > 0
};

// Rows with score >= tau become one-hot at their argmax; rejected rows get
// top mass 1/k with the freed mass spread proportionally over the rest.
ProbBatch ece_optimal_map(const ProbBatch& p, std::span<const double> scores, Threshold tau);

// Rows with score >= tau become one-hot; rejected rows get top mass
// min(1/2, current top), the freed mass again spread proportionally.
ProbBatch cwece_optimal_map(const ProbBatch& p, std::span<const double> scores, Threshold tau);

// Grid search for the temperature minimizing EqualWidth-15 ECE of
// softmax(z/T); ties resolve to the smallest T.
Temperature fit_temperature(const LogitBatch& logits, const LabelBatch& labels,
                            double grid_lo = 0.5, double grid_hi = 3.0, double step = 0.01);

// softmax(z/T). Monotone per row, so argmax and accuracy are unchanged.
ProbBatch apply_temperature(const LogitBatch& logits, Temperature t);

}  // namespace selcal
