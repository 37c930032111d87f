#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace selcal::cli {

// Fixed 9-significant-digit formatting so rerunning a command yields
// byte-identical reports. NaN prints as "nan" regardless of sign.
std::string fmt_g9(double v);

std::string json_array_g9(std::span<const double> values);

// Minimal JSON object builder that keeps keys in insertion order.
class JsonWriter {
 public:
  void add(const std::string& key, double v);
  void add_int(const std::string& key, long long v);
  void add_uint(const std::string& key, std::uint64_t v);
  void add_bool(const std::string& key, bool v);
  void add_str(const std::string& key, const std::string& v);
  void add_raw(const std::string& key, const std::string& raw);
  std::string str() const;

 private:
  void key(const std::string& k);
  std::string body_;
  bool first_ = true;
};

// Input paths are checked up front so a typo fails before any work starts.
void require_file(const std::filesystem::path& path, const std::string& what);

// Creates the directory if needed; rejects paths that exist as files.
void ensure_out_dir(const std::filesystem::path& dir);

}  // namespace selcal::cli
