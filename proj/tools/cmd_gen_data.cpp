#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config_merge.hpp"
#include "report.hpp"
#include "selcal/core.hpp"
#include "selcal/io.hpp"
#include "selcal/oracle.hpp"

namespace selcal::cli {

namespace {

struct GenDataOpts {
  int n = 4000;
  int k = 3;
  int d = 2;
  double radius = 1.65;
  double variance = 1.0;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config;
};

int run(const GenDataOpts& o) {
  require_flag(o.out_dir, "--out-dir");
  if (o.n < 1) throw std::invalid_argument("--n must be >= 1");
  ensure_out_dir(o.out_dir);
  const MixtureSpec spec = ring_mixture_spec(o.k, o.d, o.radius, o.variance, o.seed);
  const MixtureSample sample = gen_mixture(spec, static_cast<std::size_t>(o.n));

  std::size_t bayes_misses = 0;
  for (std::size_t i = 0; i < sample.labels.size(); ++i)
    if (static_cast<int>(argmax_row(sample.posterior.values.row(i))) != sample.labels.classes[i])
      ++bayes_misses;

  const std::filesystem::path dir(o.out_dir);
  atomic_write_file(dir / "data.jsonl", format_dataset(sample.features, sample.labels));
  atomic_write_file(dir / "posteriors.jsonl", format_posteriors(sample.posterior));

  JsonWriter meta;
  meta.add_int("n", o.n);
  meta.add_int("k", o.k);
  meta.add_int("d", o.d);
  meta.add("radius", o.radius);
  meta.add("variance", o.variance);
  meta.add_uint("seed", o.seed);
  meta.add("bayes_error_estimate",
           static_cast<double>(bayes_misses) / static_cast<double>(sample.labels.size()));
  atomic_write_file(dir / "meta.json", meta.str() + "\n");
  std::cout << meta.str() << "\n";
  return 0;
}

}  // namespace

void register_gen_data(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<GenDataOpts>();
  CLI::App* sub = app.add_subcommand(
      "gen-data", "Sample a Gaussian-mixture dataset with exact posteriors");
  sub->add_option("--n", opts->n, "Number of samples");
  sub->add_option("--k", opts->k, "Number of classes");
  sub->add_option("--d", opts->d, "Feature dimension");
  sub->add_option("--radius", opts->radius, "Radius of the ring of class means");
  sub->add_option("--variance", opts->variance, "Shared isotropic variance");
  sub->add_option("--seed", opts->seed, "RNG seed");
  sub->add_option("--out-dir", opts->out_dir,
                  "Directory for data.jsonl, posteriors.jsonl and meta.json");
  sub->add_option("--config", opts->config, "JSON config file (flags override its values)");
  sub->callback([sub, opts, &exit_code]() {
    apply_config(sub, opts->config);
    exit_code = run(*opts);
  });
}

}  // namespace selcal::cli
