#include "config_merge.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "report.hpp"

namespace selcal::cli {

namespace {

std::string scalar_text(const std::string& key, const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number()) return value.dump();
  throw std::invalid_argument("--config: key '" + key +
                              "' must be a scalar or an array of scalars");
}

}  // namespace

void apply_config(CLI::App* sub, const std::string& config_path) {
  if (config_path.empty()) return;
  require_file(config_path, "--config");
  std::ifstream in(config_path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw std::invalid_argument("--config: file is not valid JSON");
  if (!doc.is_object()) throw std::invalid_argument("--config: file must hold a JSON object");

  for (const auto& [key, value] : doc.items()) {
    if (key == "config") throw std::invalid_argument("--config: files cannot nest 'config'");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw std::invalid_argument("--config: unknown key '" + key + "' for subcommand '" +
                                  sub->get_name() + "'");
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& element : value) opt->add_result(scalar_text(key, element));
    } else {
      opt->add_result(scalar_text(key, value));
    }
    opt->run_callback();
  }
}

void require_flag(const std::string& value, const char* flag) {
  if (value.empty())
    throw std::invalid_argument(std::string(flag) + " is required (flag or config key)");
}

}  // namespace selcal::cli
