#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include "selcal/types.hpp"

namespace selcal {

// Prediction dumps are line-delimited JSON objects, one record per line:
//   {"logits": [z_0, ..., z_{k-1}], "label": y}
// UTF-8, no header, 0-based labels. Order is preserved.
std::pair<LogitBatch, LabelBatch> load_predictions(const std::filesystem::path& path);

// One record per line, floats at full round-trip precision.
std::string format_predictions(const LogitBatch& logits, const LabelBatch& labels);

// Dataset dumps follow the same shape with a "features" array per line:
//   {"features": [x_0, ..., x_{d-1}], "label": y}
Dataset load_dataset(const std::filesystem::path& path);
std::string format_dataset(const Matrix& features, const LabelBatch& labels);

// Sidecar rows of exact posteriors: {"posterior": [...]} per line.
std::string format_posteriors(const ProbBatch& posterior);

// Writes content to a temp file in the target directory, then renames it
// over the destination, so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace selcal
