#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace selcal::cli {

std::string fmt_g9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string json_array_g9(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += fmt_g9(values[i]);
  }
  out += ']';
  return out;
}

void JsonWriter::key(const std::string& k) {
  if (!first_) body_ += ',';
  first_ = false;
  body_ += '"';
  body_ += k;
  body_ += "\":";
}

void JsonWriter::add(const std::string& k, double v) {
  key(k);
  body_ += fmt_g9(v);
}

void JsonWriter::add_int(const std::string& k, long long v) {
  key(k);
  body_ += std::to_string(v);
}

void JsonWriter::add_uint(const std::string& k, std::uint64_t v) {
  key(k);
  body_ += std::to_string(v);
}

void JsonWriter::add_bool(const std::string& k, bool v) {
  key(k);
  body_ += v ? "true" : "false";
}

void JsonWriter::add_str(const std::string& k, const std::string& v) {
  key(k);
  body_ += '"';
  body_ += v;
  body_ += '"';
}

void JsonWriter::add_raw(const std::string& k, const std::string& raw) {
  key(k);
  body_ += raw;
}

std::string JsonWriter::str() const { return "{" + body_ + "}"; }

void require_file(const std::filesystem::path& path, const std::string& what) {
  if (!std::filesystem::is_regular_file(path))
    throw std::invalid_argument(what + " file not found: " + path.string());
}

void ensure_out_dir(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir) && !std::filesystem::is_directory(dir))
    throw std::invalid_argument("--out-dir exists and is not a directory: " + dir.string());
  std::filesystem::create_directories(dir);
}

}  // namespace selcal::cli
