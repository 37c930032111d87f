#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config_merge.hpp"
#include "report.hpp"
#include "selcal/softrank.hpp"

namespace selcal::cli {

namespace {

struct SoftrankOpts {
  std::string scores;
  double epsilon = 0.05;
  std::string config;
};

std::vector<double> parse_score_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("--scores: cannot parse '" + token + "' as a number");
    }
    if (used != token.size())
      throw std::invalid_argument("--scores: trailing characters in '" + token + "'");
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int run(const SoftrankOpts& o) {
  require_flag(o.scores, "--scores");
  const std::vector<double> scores = parse_score_list(o.scores);
  const SoftRankResult result = soft_rank_ascending(scores, SoftRankConfig{o.epsilon});
  const double sum = std::accumulate(result.ranks.begin(), result.ranks.end(), 0.0);

  JsonWriter report;
  report.add("epsilon", o.epsilon);
  report.add_raw("scores", json_array_g9(scores));
  report.add_raw("ranks", json_array_g9(result.ranks));
  report.add("sum", sum);
  std::cout << report.str() << "\n";
  return 0;
}

}  // namespace

void register_softrank(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<SoftrankOpts>();
  CLI::App* sub = app.add_subcommand("softrank", "Soft ascending ranks for a score list");
  sub->add_option("--scores", opts->scores, "Comma-separated scores, e.g. 0.3,1.2,-0.5");
  sub->add_option("--epsilon", opts->epsilon, "Regularization strength");
  sub->add_option("--config", opts->config, "JSON config file (flags override its values)");
  sub->callback([sub, opts, &exit_code]() {
    apply_config(sub, opts->config);
    exit_code = run(*opts);
  });
}

}  // namespace selcal::cli
