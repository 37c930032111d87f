#include "selcal/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace selcal {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw std::invalid_argument("from_rows: ragged rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {

void check_batch_shape(const Matrix& values, const char* what) {
  if (values.rows() < 1) throw std::invalid_argument(std::string(what) + ": need at least one row");
  if (values.cols() < 2)
    throw std::invalid_argument(std::string(what) + ": need at least two classes");
}

}  // namespace

LogitBatch make_logit_batch(Matrix values) {
  check_batch_shape(values, "logit batch");
  for (double v : values.data())
    if (!std::isfinite(v)) throw std::invalid_argument("logit batch: non-finite entry");
  return {std::move(values)};
}

ProbBatch make_prob_batch(Matrix values) {
  check_batch_shape(values, "prob batch");
  for (std::size_t i = 0; i < values.rows(); ++i) {
    double sum = 0.0;
    for (double v : values.row(i)) {
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("prob batch: entry outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("prob batch: row does not sum to 1");
  }
  return {std::move(values)};
}

LabelBatch make_label_batch(std::vector<int> classes, int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("label batch: need at least two classes");
  for (int c : classes)
    if (c < 0 || c >= num_classes) throw std::invalid_argument("label batch: label out of range");
  return {std::move(classes), num_classes};
}

}  // namespace selcal
