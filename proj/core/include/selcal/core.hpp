#pragma once

#include <span>
#include <vector>

#include "selcal/types.hpp"

namespace selcal {

// Probabilities are clamped to [kProbFloor, 1] before any logarithm.
inline constexpr double kProbFloor = 1e-12;

double clamp_prob(double p);
double clamped_log(double p);

// Index of the row maximum; ties break toward the smallest index.
std::size_t argmax_row(std::span<const double> row);

// Numerically stabilized row-wise softmax (max subtraction).
ProbBatch softmax(const LogitBatch& logits);

std::vector<int> argmax_predict(const ProbBatch& p);

// Fraction of rows whose argmax disagrees with the label.
double empirical_error(const ProbBatch& p, const LabelBatch& labels);

}  // namespace selcal
