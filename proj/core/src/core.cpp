#include "selcal/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selcal {

double clamp_prob(double p) { return std::min(std::max(p, kProbFloor), 1.0); }

double clamped_log(double p) { return std::log(clamp_prob(p)); }

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

ProbBatch softmax(const LogitBatch& logits) {
  const Matrix& z = logits.values;
  Matrix p(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto zi = z.row(i);
    for (double v : zi)
      if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite logit");
    const double zmax = *std::max_element(zi.begin(), zi.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) {
      p(i, j) = std::exp(zi[j] - zmax);
      sum += p(i, j);
    }
    for (std::size_t j = 0; j < z.cols(); ++j) p(i, j) /= sum;
  }
  return {std::move(p)};
}

std::vector<int> argmax_predict(const ProbBatch& p) {
  std::vector<int> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out[i] = static_cast<int>(argmax_row(p.values.row(i)));
  return out;
}

double empirical_error(const ProbBatch& p, const LabelBatch& labels) {
  if (p.size() != labels.size())
    throw std::invalid_argument("empirical_error: batch sizes differ");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (static_cast<int>(argmax_row(p.values.row(i))) != labels.classes[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(p.size());
}

}  // namespace selcal
