#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config_merge.hpp"
#include "report.hpp"
#include "selcal/losses.hpp"
#include "selcal/rng.hpp"

namespace selcal::cli {

namespace {

struct GradcheckOpts {
  std::string loss;
  double gamma = 2.0;
  double lambda = 0.5;
  double epsilon = 0.05;
  std::string csf = "msp";
  int n = 8;
  int k = 3;
  int trials = 20;
  std::uint64_t seed = 0;
  std::string config;
};

// Interior random simplex rows (normalized exponentials), so the losses and
// the soft ranks are differentiable at the sampled points almost surely.
ProbBatch random_prob_batch(std::size_t n, std::size_t k, Rng& rng) {
  Matrix m(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      m(i, c) = -std::log(1.0 - rng.uniform());
      sum += m(i, c);
    }
    for (std::size_t c = 0; c < k; ++c) m(i, c) /= sum;
  }
  ProbBatch p;
  p.values = m;
  return p;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

int run(const GradcheckOpts& o) {
  require_flag(o.loss, "--loss");
  if (o.n < 1 || o.k < 2) throw std::invalid_argument("need --n >= 1 and --k >= 2");
  if (o.trials < 1) throw std::invalid_argument("--trials must be >= 1");

  LossSpec spec;
  spec.kind = parse_loss_kind(o.loss);
  spec.gamma = o.gamma;
  spec.raurc.lambda = o.lambda;
  spec.raurc.csf = parse_csf(o.csf);
  spec.raurc.softrank.epsilon = o.epsilon;

  const bool per_sample = spec.kind == LossKind::CrossEntropy ||
                          spec.kind == LossKind::Focal ||
                          spec.kind == LossKind::InverseFocal;
  const double tolerance = per_sample ? 1e-6 : 1e-4;
  const double h = 1e-5;

  double max_rel = 0.0;
  for (int trial = 0; trial < o.trials; ++trial) {
    Rng rng(o.seed + static_cast<std::uint64_t>(trial));
    ProbBatch p = random_prob_batch(static_cast<std::size_t>(o.n),
                                    static_cast<std::size_t>(o.k), rng);
    std::vector<int> classes(static_cast<std::size_t>(o.n));
    for (int& c : classes) c = static_cast<int>(rng.uniform_int(0, o.k - 1));
    const LabelBatch labels = make_label_batch(classes, o.k);

    const BatchLossGrad analytic = evaluate_loss(spec, p, labels);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t c = 0; c < p.num_classes(); ++c) {
        const double saved = p.values(i, c);
        p.values(i, c) = saved + h;
        const double plus = evaluate_loss(spec, p, labels).value;
        p.values(i, c) = saved - h;
        const double minus = evaluate_loss(spec, p, labels).value;
        p.values(i, c) = saved;
        const double fd = (plus - minus) / (2.0 * h);
        max_rel = std::max(max_rel, rel_err(analytic.grad_p(i, c), fd));
      }
    }
  }

  const bool pass = max_rel <= tolerance;
  JsonWriter report;
  report.add_str("loss", loss_kind_name(spec.kind));
  report.add_int("trials", o.trials);
  report.add_int("n", o.n);
  report.add_int("k", o.k);
  report.add("max_rel_err", max_rel);
  report.add("tolerance", tolerance);
  report.add_bool("pass", pass);
  std::cout << report.str() << "\n";
  return pass ? 0 : 1;
}

}  // namespace

void register_gradcheck(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<GradcheckOpts>();
  CLI::App* sub = app.add_subcommand(
      "gradcheck", "Compare analytic loss gradients against central finite differences");
  sub->add_option("--loss", opts->loss, "Objective: xe|focal|invfocal|aurc|raurc");
  sub->add_option("--gamma", opts->gamma, "Focusing strength for focal/invfocal");
  sub->add_option("--lambda", opts->lambda, "Risk/rank-weighted mix for raurc");
  sub->add_option("--epsilon", opts->epsilon, "Soft-rank regularization strength");
  sub->add_option("--csf", opts->csf, "Confidence score: msp|margin|negentropy");
  sub->add_option("--n", opts->n, "Batch size per trial");
  sub->add_option("--k", opts->k, "Class count");
  sub->add_option("--trials", opts->trials, "Number of random instances");
  sub->add_option("--seed", opts->seed, "Base RNG seed");
  sub->add_option("--config", opts->config, "JSON config file (flags override its values)");
  sub->callback([sub, opts, &exit_code]() {
    apply_config(sub, opts->config);
    exit_code = run(*opts);
  });
}

}  // namespace selcal::cli
