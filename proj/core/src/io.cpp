#include "selcal/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace selcal {

namespace {

using nlohmann::json;

std::string location(const std::filesystem::path& path, std::size_t lineno) {
  return path.string() + ":" + std::to_string(lineno);
}

json parse_line(const std::filesystem::path& path, std::size_t lineno, const std::string& line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(location(path, lineno) + ": parse error: " + e.what());
  }
  if (!rec.is_object()) throw std::runtime_error(location(path, lineno) + ": record is not an object");
  return rec;
}

std::vector<double> read_real_array(const std::filesystem::path& path, std::size_t lineno,
                                    const json& rec, const char* field) {
  if (!rec.contains(field) || !rec[field].is_array())
    throw std::runtime_error(location(path, lineno) + ": missing array field '" + field + "'");
  std::vector<double> out;
  out.reserve(rec[field].size());
  for (const auto& v : rec[field]) {
    if (!v.is_number())
      throw std::runtime_error(location(path, lineno) + ": non-numeric entry in '" + field + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

int read_label(const std::filesystem::path& path, std::size_t lineno, const json& rec) {
  if (!rec.contains("label") || !rec["label"].is_number_integer())
    throw std::runtime_error(location(path, lineno) + ": missing integer field 'label'");
  return rec["label"].get<int>();
}

// %.17g keeps doubles bit-exact through a parse round trip.
void append_array(std::string& out, std::span<const double> vals) {
  char buf[40];
  out += '[';
  for (std::size_t j = 0; j < vals.size(); ++j) {
    if (j) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", vals[j]);
    out += buf;
  }
  out += ']';
}

struct RowFile {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

RowFile load_rows(const std::filesystem::path& path, const char* field) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  RowFile out;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = parse_line(path, lineno, line);
    std::vector<double> row = read_real_array(path, lineno, rec, field);
    if (out.rows.empty()) {
      width = row.size();
      if (width == 0) throw std::runtime_error(location(path, lineno) + ": empty '" + field + "'");
    } else if (row.size() != width) {
      throw std::runtime_error(location(path, lineno) + ": schema error: expected " +
                               std::to_string(width) + " values in '" + field + "', got " +
                               std::to_string(row.size()));
    }
    out.rows.push_back(std::move(row));
    out.labels.push_back(read_label(path, lineno, rec));
  }
  if (out.rows.empty()) throw std::runtime_error(path.string() + ": no records");
  return out;
}

}  // namespace

std::pair<LogitBatch, LabelBatch> load_predictions(const std::filesystem::path& path) {
  RowFile rf = load_rows(path, "logits");
  const int k = static_cast<int>(rf.rows[0].size());
  for (std::size_t i = 0; i < rf.labels.size(); ++i)
    if (rf.labels[i] < 0 || rf.labels[i] >= k)
      throw std::runtime_error(path.string() + ": schema error: label " +
                               std::to_string(rf.labels[i]) + " outside [0," +
                               std::to_string(k) + ") in record " + std::to_string(i + 1));
  return {make_logit_batch(Matrix::from_rows(rf.rows)), make_label_batch(rf.labels, k)};
}

std::string format_predictions(const LogitBatch& logits, const LabelBatch& labels) {
  if (logits.size() != labels.size())
    throw std::invalid_argument("format_predictions: batch sizes differ");
  std::string out;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out += "{\"logits\":";
    append_array(out, logits.values.row(i));
    out += ",\"label\":" + std::to_string(labels.classes[i]) + "}\n";
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
  RowFile rf = load_rows(path, "features");
  int max_label = 0;
  for (int c : rf.labels) {
    if (c < 0) throw std::runtime_error(path.string() + ": schema error: negative label");
    max_label = std::max(max_label, c);
  }
  const int k = std::max(2, max_label + 1);
  return {Matrix::from_rows(rf.rows), make_label_batch(rf.labels, k)};
}

std::string format_dataset(const Matrix& features, const LabelBatch& labels) {
  if (features.rows() != labels.size())
    throw std::invalid_argument("format_dataset: batch sizes differ");
  std::string out;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out += "{\"features\":";
    append_array(out, features.row(i));
    out += ",\"label\":" + std::to_string(labels.classes[i]) + "}\n";
  }
  return out;
}

std::string format_posteriors(const ProbBatch& posterior) {
  std::string out;
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    out += "{\"posterior\":";
    append_array(out, posterior.values.row(i));
    out += "}\n";
  }
  return out;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace selcal
