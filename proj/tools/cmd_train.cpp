#include <cstdint>
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
#include "selcal/trainer.hpp"

namespace selcal::cli {

namespace {

struct TrainOpts {
  std::string data;
  std::string loss = "xe";
  double gamma = 0.0;
  double lambda = 0.5;
  double epsilon = 0.05;
  std::string csf = "msp";
  int epochs = 50;
  int batch = 128;
  double lr = 0.01;
  std::vector<int> hidden = {16};
  std::string activation = "relu";
  double momentum = 0.9;
  double wd = 5e-4;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string export_preds;
  std::string test_data;
  std::string export_test_preds;
  std::string config;
};

std::string format_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,train_loss,accuracy,ece15,cwece15\n";
  for (const EpochLog& e : log) {
    out += std::to_string(e.epoch);
    out += ',';
    out += fmt_g9(e.train_loss);
    out += ',';
    out += fmt_g9(e.accuracy);
    out += ',';
    out += fmt_g9(e.ece15);
    out += ',';
    out += fmt_g9(e.cwece15);
    out += '\n';
  }
  return out;
}

int run(const TrainOpts& o) {
  require_flag(o.data, "--data");
  require_flag(o.out_dir, "--out-dir");
  if (o.epochs < 1) throw std::invalid_argument("--epochs must be >= 1");
  if (o.test_data.empty() != o.export_test_preds.empty())
    throw std::invalid_argument("--test-data and --export-test-preds must be given together");
  require_file(o.data, "--data");
  if (!o.test_data.empty()) require_file(o.test_data, "--test-data");
  ensure_out_dir(o.out_dir);

  const Dataset data = load_dataset(o.data);

  LossSpec loss;
  loss.kind = parse_loss_kind(o.loss);
  loss.gamma = o.gamma;
  loss.raurc.lambda = o.lambda;
  loss.raurc.csf = parse_csf(o.csf);
  loss.raurc.softrank.epsilon = o.epsilon;

  MlpConfig mlp;
  mlp.input_dim = static_cast<int>(data.features.cols());
  mlp.hidden = o.hidden;
  mlp.output_dim = data.labels.num_classes;
  mlp.activation = parse_activation(o.activation);
  mlp.init_seed = o.seed;

  SgdConfig sgd;
  sgd.lr = o.lr;
  sgd.momentum = o.momentum;
  sgd.weight_decay = o.wd;
  sgd.batch_size = o.batch;
  sgd.epochs = o.epochs;
  sgd.seed = o.seed;

  const TrainResult result = train(data, loss, mlp, sgd);

  const std::filesystem::path dir(o.out_dir);
  save_mlp(dir / "model.json", result.model);
  atomic_write_file(dir / "train_log.csv", format_log_csv(result.log));

  if (!o.export_preds.empty()) {
    const LogitBatch preds = forward(result.model, data.features);
    atomic_write_file(o.export_preds, format_predictions(preds, data.labels));
  }
  if (!o.test_data.empty()) {
    const Dataset test = load_dataset(o.test_data);
    if (test.features.cols() != data.features.cols())
      throw std::invalid_argument("--test-data feature width differs from --data");
    if (test.labels.num_classes != data.labels.num_classes)
      throw std::invalid_argument("--test-data class count differs from --data");
    const LogitBatch preds = forward(result.model, test.features);
    atomic_write_file(o.export_test_preds, format_predictions(preds, test.labels));
  }

  const EpochLog& last = result.log.back();
  JsonWriter report;
  report.add_str("loss", loss_kind_name(loss.kind));
  report.add_int("epochs", o.epochs);
  report.add("final_train_loss", last.train_loss);
  report.add("final_accuracy", last.accuracy);
  report.add("final_ece15", last.ece15);
  report.add("final_cwece15", last.cwece15);
  std::cout << report.str() << "\n";
  return 0;
}

}  // namespace

void register_train(CLI::App& app, int& exit_code) {
  auto opts = std::make_shared<TrainOpts>();
  CLI::App* sub = app.add_subcommand("train", "Train an MLP on a dataset dump");
  sub->add_option("--data", opts->data, "Training dataset (data.jsonl)");
  sub->add_option("--loss", opts->loss, "Objective: xe|focal|invfocal|aurc|raurc");
  sub->add_option("--gamma", opts->gamma, "Focusing strength for focal/invfocal");
  sub->add_option("--lambda", opts->lambda, "Risk/rank-weighted mix for raurc");
  sub->add_option("--epsilon", opts->epsilon, "Soft-rank regularization strength");
  sub->add_option("--csf", opts->csf, "Confidence score: msp|margin|negentropy");
  sub->add_option("--epochs", opts->epochs, "Training epochs");
  sub->add_option("--batch", opts->batch, "Mini-batch size");
  sub->add_option("--lr", opts->lr, "Learning rate");
  sub->add_option("--hidden", opts->hidden, "Hidden layer widths")->expected(-1);
  sub->add_option("--activation", opts->activation, "Hidden activation: relu|tanh");
  sub->add_option("--momentum", opts->momentum, "SGD momentum");
  sub->add_option("--wd", opts->wd, "Weight decay");
  sub->add_option("--seed", opts->seed, "Init and shuffle seed");
  sub->add_option("--out-dir", opts->out_dir, "Directory for model.json and train_log.csv");
  sub->add_option("--export-preds", opts->export_preds,
                  "Write train-set predictions of the final model to this path");
  sub->add_option("--test-data", opts->test_data, "Held-out dataset dump");
  sub->add_option("--export-test-preds", opts->export_test_preds,
                  "Write held-out predictions of the final model to this path");
  sub->add_option("--config", opts->config, "JSON config file (flags override its values)");
  sub->callback([sub, opts, &exit_code]() {
    apply_config(sub, opts->config);
    exit_code = run(*opts);
  });
}

}  // namespace selcal::cli
