#include "selcal/calibmaps.hpp"

#include <cmath>
#include <stdexcept>

#include "selcal/core.hpp"
#include "selcal/metrics.hpp"

namespace selcal {

namespace {

void check_map_inputs(const ProbBatch& p, std::span<const double> scores) {
  if (p.num_classes() < 2) throw std::invalid_argument("optimal map: need k >= 2");
  if (p.size() != scores.size())
    throw std::invalid_argument("optimal map: scores length must match batch size");
}

// Rewrites one rejected row: the top class drops to `target` and the freed
// mass is spread over the other classes in proportion to their current
// values. A saturated row (top == 1) has nothing to be proportional to, so
// the freed mass is split evenly instead.
void redistribute_row(std::span<double> row, std::size_t top, double target) {
  const double t = row[top];
  const double rest = 1.0 - t;
  if (rest > 0.0) {
    const double scale = (1.0 - target) / rest;
    for (double& v : row) v *= scale;
  } else {
    const double share = (1.0 - target) / static_cast<double>(row.size() - 1);
    for (double& v : row) v = share;
  }
  row[top] = target;
}

ProbBatch map_rows(const ProbBatch& p, std::span<const double> scores, double tau,
                   double (*reject_target)(double top, std::size_t k)) {
  check_map_inputs(p, scores);
  Matrix out = p.values;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto row = out.row(i);
    const std::size_t top = argmax_row(row);
    if (scores[i] >= tau) {
      for (double& v : row) v = 0.0;
      row[top] = 1.0;
    } else {
      redistribute_row(row, top, reject_target(row[top], row.size()));
    }
  }
  ProbBatch result;
  result.values = std::move(out);
  return result;
}

}  // namespace

ProbBatch ece_optimal_map(const ProbBatch& p, std::span<const double> scores, Threshold tau) {
  return map_rows(p, scores, tau.tau,
                  [](double, std::size_t k) { return 1.0 / static_cast<double>(k); });
}

ProbBatch cwece_optimal_map(const ProbBatch& p, std::span<const double> scores, Threshold tau) {
  return map_rows(p, scores, tau.tau, [](double top, std::size_t) { return std::min(0.5, top); });
}

Temperature fit_temperature(const LogitBatch& logits, const LabelBatch& labels, double lo,
                            double hi, double step) {
  if (!(lo > 0.0) || !(step > 0.0))
    throw std::invalid_argument("fit_temperature: need grid_lo > 0 and step > 0");
  if (hi < lo) throw std::invalid_argument("fit_temperature: empty grid");
  const BinningScheme ew15{BinningKind::EqualWidth, 15};
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  double best_t = lo;
  double best_ece = binned_ece(apply_temperature(logits, Temperature{lo}), labels, ew15);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t = lo + static_cast<double>(i) * step;
    const double ece = binned_ece(apply_temperature(logits, Temperature{t}), labels, ew15);
    if (ece < best_ece) {
      best_ece = ece;
      best_t = t;
    }
  }
  return Temperature{best_t};
}

ProbBatch apply_temperature(const LogitBatch& logits, Temperature temp) {
  if (!(temp.t > 0.0)) throw std::invalid_argument("apply_temperature: need T > 0");
  Matrix scaled = logits.values;
  for (std::size_t i = 0; i < scaled.rows() * scaled.cols(); ++i) scaled.data()[i] /= temp.t;
  LogitBatch rescaled;
  rescaled.values = std::move(scaled);
  return softmax(rescaled);
}

}  // namespace selcal
