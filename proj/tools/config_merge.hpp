#pragma once

#include <string>

#include <CLI11.hpp>

namespace selcal::cli {

// Merges a flat JSON config object into a parsed subcommand: each key names
// a long option without the dashes, e.g. {"preds": "p.jsonl", "bins": 15}.
// Options already set on the command line keep their values; unknown keys
// are rejected. Call at the start of the subcommand callback.
void apply_config(CLI::App* sub, const std::string& config_path);

// Options fillable from a config file cannot use CLI11's required();
// commands check the merged value instead with this helper.
void require_flag(const std::string& value, const char* flag);

}  // namespace selcal::cli
