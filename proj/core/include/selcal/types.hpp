#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace selcal {

// Dense row-major matrix of doubles. Batches here are at most a few
// thousand rows by a handful of columns, so a flat vector is all we need.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// One line of a prediction dump: raw model outputs plus the true class.
struct PredictionRecord {
  std::vector<double> logits;
  int label = 0;
};

// Raw model outputs, one row per sample.
struct LogitBatch {
  Matrix values;

  std::size_t size() const { return values.rows(); }
  std::size_t num_classes() const { return values.cols(); }
};

// Rows on the probability simplex: entries in [0,1], each row summing to 1
// within 1e-9.
struct ProbBatch {
  Matrix values;

  std::size_t size() const { return values.rows(); }
  std::size_t num_classes() const { return values.cols(); }
};

// 0-based class labels validated against a class count.
struct LabelBatch {
  std::vector<int> classes;
  int num_classes = 0;

  std::size_t size() const { return classes.size(); }
};

// Feature matrix plus aligned labels, as produced by the mixture generator.
struct Dataset {
  Matrix features;
  LabelBatch labels;
};

// Validating constructors; throw std::invalid_argument on violated
// invariants so bad data never reaches the numeric paths.
LogitBatch make_logit_batch(Matrix values);
ProbBatch make_prob_batch(Matrix values);
LabelBatch make_label_batch(std::vector<int> classes, int num_classes);

}  // namespace selcal
