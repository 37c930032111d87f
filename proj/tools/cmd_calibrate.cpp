#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config_merge.hpp"
#include "report.hpp"
#include "selcal/calibmaps.hpp"
#include "selcal/core.hpp"
#include "selcal/csf.hpp"
#include "selcal/io.hpp"
#include "selcal/metrics.hpp"

namespace selcal::cli {

namespace {

struct CalibrateOpts {
  std::string preds;
  std::string method;
  double tau = 0.5;
  std::string csf = "msp";
  int bins = 15;
  std::string binning = "ew";
  std::string out_dir;
  std::string config;
};

std::string metric_block(const ProbBatch& p, const LabelBatch& labels,
                         const BinningScheme& scheme) {
  JsonWriter block;
  block.add("acc", 1.0 - empirical_error(p, labels));
  block.add("ece", binned_ece(p, labels, scheme));
  block.add("cwece", binned_cwece(p, labels, scheme));
  block.add("brier", brier(p, labels));
  return block.str();
}

int run(const CalibrateOpts& o) {
  require_flag(o.preds, "--preds");
  require_flag(o.method, "--method");
  require_flag(o.out_dir, "--out-dir");
  if (o.bins < 1) throw std::invalid_argument("--bins must be >= 1");
  require_file(o.preds, "--preds");
  ensure_out_dir(o.out_dir);

  const auto [logits, labels] = load_predictions(o.preds);
  const ProbBatch before = softmax(logits);
  const BinningScheme scheme{parse_binning(o.binning), o.bins};

  JsonWriter report;
  report.add_str("method", o.method);

  Matrix out_logits;
  if (o.method == "temp") {
    const Temperature temp = fit_temperature(logits, labels);
    out_logits = logits.values;
    for (double& v : out_logits.data()) v /= temp.t;
    report.add("temperature", temp.t);
  } else if (o.method == "ece-map" || o.method == "cwece-map") {
    const std::vector<double> scores = csf_scores(parse_csf(o.csf), before);
    const Threshold tau{o.tau};
    const ProbBatch mapped = o.method == "ece-map" ? ece_optimal_map(before, scores, tau)
                                                   : cwece_optimal_map(before, scores, tau);
    // The dump format carries logits, so mapped probabilities are encoded as
    // log-probabilities; softmax recovers them up to the zero-entry floor.
    out_logits = mapped.values;
    for (double& v : out_logits.data()) v = clamped_log(v);
  } else {
    throw std::invalid_argument("unknown --method '" + o.method +
                                "' (expected temp|ece-map|cwece-map)");
  }

  LogitBatch calibrated;
  calibrated.values = std::move(out_logits);
  const ProbBatch after = softmax(calibrated);
  atomic_write_file(std::filesystem::path(o.out_dir) / "calibrated.jsonl",
                    format_predictions(calibrated, labels));

  report.add_raw("before", metric_block(before, labels, scheme));
  report.add_raw("after", metric_block(after, labels, scheme));
  std::cout << report.str() << "\n";
  return 0;
}

}  // namespace

void register_calibrate(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<CalibrateOpts>();
  CLI::App* sub =
      app.add_subcommand("calibrate", "Post-hoc calibration of a prediction dump");
  sub->add_option("--preds", opts->preds, "Prediction dump (logits + labels)");
  sub->add_option("--method", opts->method, "temp|ece-map|cwece-map");
  sub->add_option("--tau", opts->tau, "CSF acceptance threshold for the maps");
  sub->add_option("--csf", opts->csf, "Confidence score: msp|margin|negentropy");
  sub->add_option("--bins", opts->bins, "Bin count for the before/after report");
  sub->add_option("--binning", opts->binning, "Binning scheme: ew|em|singleton");
  sub->add_option("--out-dir", opts->out_dir, "Directory for calibrated.jsonl");
  sub->add_option("--config", opts->config, "JSON config file (flags override its values)");
  sub->callback([sub, opts, &exit_code]() {
    apply_config(sub, opts->config);
    exit_code = run(*opts);
  });
}

}  // namespace selcal::cli
