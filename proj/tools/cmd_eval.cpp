#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config_merge.hpp"
#include "report.hpp"
#include "selcal/core.hpp"
#include "selcal/csf.hpp"
#include "selcal/io.hpp"
#include "selcal/metrics.hpp"

namespace selcal::cli {

namespace {

struct EvalOpts {
  std::string preds;
  int bins = 15;
  std::string csf = "msp";
  std::string out_dir;
  std::string config;
};

std::string format_reliability_csv(const ReliabilityBins& rel) {
  std::string out = "bin_lo,bin_hi,count,conf,acc\n";
  for (const ReliabilityBin& b : rel.bins) {
    out += fmt_g9(b.lo);
    out += ',';
    out += fmt_g9(b.hi);
    out += ',';
    out += std::to_string(b.count);
    out += ',';
    out += fmt_g9(b.conf);
    out += ',';
    out += fmt_g9(b.acc);
    out += '\n';
  }
  return out;
}

std::string format_risk_coverage_csv(const std::vector<RiskCoveragePoint>& points) {
  std::string out = "coverage,risk\n";
  for (const RiskCoveragePoint& pt : points) {
    out += fmt_g9(pt.coverage);
    out += ',';
    out += fmt_g9(pt.selective_risk);
    out += '\n';
  }
  return out;
}

int run(const EvalOpts& o) {
  require_flag(o.preds, "--preds");
  if (o.bins < 1) throw std::invalid_argument("--bins must be >= 1");
  require_file(o.preds, "--preds");

  const auto [logits, labels] = load_predictions(o.preds);
  const ProbBatch p = softmax(logits);
  const BinningScheme ew{BinningKind::EqualWidth, o.bins};
  const BinningScheme em{BinningKind::EqualMass, o.bins};
  const SupBoundsReport sup = sup_binning_bounds_check(p, labels);

  // Selective risk uses the 0/1 misclassification loss, ranked by the CSF.
  const std::vector<int> predicted = argmax_predict(p);
  std::vector<double> loss01(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    loss01[i] = predicted[i] == labels.classes[i] ? 0.0 : 1.0;
  const std::vector<double> scores = csf_scores(parse_csf(o.csf), p);

  JsonWriter report;
  report.add("acc", 1.0 - empirical_error(p, labels));
  report.add("ece_ew", binned_ece(p, labels, ew));
  report.add("ece_em", binned_ece(p, labels, em));
  report.add("cwece_ew", binned_cwece(p, labels, ew));
  report.add("cwece_em", binned_cwece(p, labels, em));
  report.add("sup_ece", sup.sup_ece);
  report.add("sup_cwece", sup.sup_cwece);
  report.add("brier", brier(p, labels));
  report.add("aurc_curve", aurc_curve(loss01, scores));
  report.add("aurc_mc", mc_aurc(loss01, scores));
  std::cout << report.str() << "\n";

  if (!o.out_dir.empty()) {
    ensure_out_dir(o.out_dir);
    const std::filesystem::path dir(o.out_dir);
    atomic_write_file(dir / "reliability.csv",
                      format_reliability_csv(reliability_bins(p, labels, o.bins)));
    atomic_write_file(dir / "risk_coverage.csv",
                      format_risk_coverage_csv(risk_coverage_curve(loss01, scores)));
  }
  return 0;
}

}  // namespace

void register_eval(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<EvalOpts>();
  CLI::App* sub = app.add_subcommand("eval", "Metric report for a prediction dump");
  sub->add_option("--preds", opts->preds, "Prediction dump (logits + labels)");
  sub->add_option("--bins", opts->bins, "Bin count for the binned estimators");
  sub->add_option("--csf", opts->csf, "Confidence score: msp|margin|negentropy");
  sub->add_option("--out-dir", opts->out_dir,
                  "Also write reliability.csv and risk_coverage.csv here");
  sub->add_option("--config", opts->config, "JSON config file (flags override its values)");
  sub->callback([sub, opts, &exit_code]() {
    apply_config(sub, opts->config);
    exit_code = run(*opts);
  });
}

}  // namespace selcal::cli
