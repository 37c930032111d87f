#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config_merge.hpp"
#include "report.hpp"
#include "selcal/io.hpp"
#include "selcal/losses.hpp"

namespace selcal::cli {

namespace {

struct WeightsOpts {
  double gamma = 3.0;
  int grid = 101;
  std::string out_dir;
  std::string config;
};

int run(const WeightsOpts& o) {
  if (o.grid < 1) throw std::invalid_argument("--grid must be >= 1");
  std::vector<double> grid(static_cast<std::size_t>(o.grid));
  for (int i = 0; i < o.grid; ++i)
    grid[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) / (o.grid + 1.0);
  const std::vector<WeightCurvePoint> curves = weight_curves(o.gamma, grid);

  std::string csv = "p,focal,inverse_focal,aurc,focal_norm,inverse_focal_norm,aurc_norm\n";
  for (const WeightCurvePoint& pt : curves) {
    csv += fmt_g9(pt.p);
    csv += ',';
    csv += fmt_g9(pt.focal_w);
    csv += ',';
    csv += fmt_g9(pt.inverse_w);
    csv += ',';
    csv += fmt_g9(pt.aurc_w);
    csv += ',';
    csv += fmt_g9(pt.focal_norm);
    csv += ',';
    csv += fmt_g9(pt.inverse_norm);
    csv += ',';
    csv += fmt_g9(pt.aurc_norm);
    csv += '\n';
  }

  if (o.out_dir.empty()) {
    std::cout << csv;
  } else {
    ensure_out_dir(o.out_dir);
    atomic_write_file(std::filesystem::path(o.out_dir) / "weights.csv", csv);
  }
  return 0;
}

}  // namespace

void register_weights(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<WeightsOpts>();
  CLI::App* sub = app.add_subcommand(
      "weights", "Loss weight factors as a function of confidence or rank");
  sub->add_option("--gamma", opts->gamma, "Focusing strength for the focal columns");
  sub->add_option("--grid", opts->grid, "Number of grid points strictly inside (0,1)");
  sub->add_option("--out-dir", opts->out_dir, "Write weights.csv here instead of stdout");
  sub->add_option("--config", opts->config, "JSON config file (flags override its values)");
  sub->callback([sub, opts, &exit_code]() {
    apply_config(sub, opts->config);
    exit_code = run(*opts);
  });
}

}  // namespace selcal::cli
