#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "finite_diff.hpp"
#include "random_instances.hpp"
#include "selcal/core.hpp"
#include "selcal/losses.hpp"
#include "selcal/oracle.hpp"
#include "selcal/rng.hpp"
#include "selcal/trainer.hpp"
#include "selcal/types.hpp"
#include "temp_dir.hpp"

using namespace selcal;
using namespace testsupport;

namespace {

MlpConfig small_config(Activation act, std::uint64_t seed) {
  MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden = {4};
  cfg.output_dim = 3;
  cfg.activation = act;
  cfg.init_seed = seed;
  return cfg;
}

Dataset mixture_dataset(int k, double radius, std::uint64_t seed, std::size_t n) {
  const MixtureSample sample = gen_mixture(ring_mixture_spec(k, 2, radius, 1.0, seed), n);
  return Dataset{sample.features, sample.labels};
}

bool models_equal(const Mlp& a, const Mlp& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (a.weights[l].data() != b.weights[l].data()) return false;
    if (a.biases[l] != b.biases[l]) return false;
  }
  return true;
}

// Mean cross-entropy of the network on a fixed batch, recomputed from
// scratch; used as the scalar objective for parameter-space probes.
double net_loss(const Mlp& model, const Matrix& features, const LabelBatch& labels,
                const LossSpec& spec) {
  const LogitBatch logits = forward(model, features);
  return evaluate_loss(spec, softmax(logits), labels).value;
}

// Analytic parameter gradients for the same objective.
MlpGradients net_gradients(const Mlp& model, const Matrix& features, const LabelBatch& labels,
                           const LossSpec& spec) {
  ForwardCache cache;
  const LogitBatch logits = forward(model, features, &cache);
  const ProbBatch p = softmax(logits);
  const BatchLossGrad bl = evaluate_loss(spec, p, labels);
  return backward(model, cache, softmax_backward(p, bl.grad_p));
}

double mlp_fd_worst(Mlp& model, const Matrix& features, const LabelBatch& labels,
                    const LossSpec& spec) {
  const MlpGradients grads = net_gradients(model, features, labels, spec);
  const auto value = [&] { return net_loss(model, features, labels, spec); };
  double worst = 0.0;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    worst = std::max(worst, max_grad_rel_err(model.weights[l].data(), value,
                                             grads.weights[l].data()));
    worst = std::max(worst, max_grad_rel_err(model.biases[l], value, grads.biases[l]));
  }
  return worst;
}

}  // namespace

TEST_CASE("activation names parse and print") {
  CHECK(parse_activation("relu") == Activation::Relu);
  CHECK(parse_activation("tanh") == Activation::Tanh);
  CHECK(activation_name(Activation::Relu) == "relu");
  CHECK(activation_name(Activation::Tanh) == "tanh");
  CHECK_THROWS_WITH_AS(parse_activation("gelu"), doctest::Contains("unknown activation"),
                       std::invalid_argument);
}

TEST_CASE("initialization is seeded, shaped and fan-in scaled") {
  MlpConfig cfg;
  cfg.input_dim = 256;
  cfg.hidden = {200, 32};
  cfg.output_dim = 5;
  cfg.activation = Activation::Relu;
  cfg.init_seed = 81;

  const Mlp a = init_mlp(cfg);
  REQUIRE(a.weights.size() == 3);
  CHECK(a.weights[0].rows() == 200);
  CHECK(a.weights[0].cols() == 256);
  CHECK(a.weights[1].rows() == 32);
  CHECK(a.weights[1].cols() == 200);
  CHECK(a.weights[2].rows() == 5);
  CHECK(a.weights[2].cols() == 32);
  for (const auto& b : a.biases)
    for (double v : b) CHECK(v == 0.0);

  CHECK(models_equal(a, init_mlp(cfg)));
  cfg.init_seed = 82;
  CHECK_FALSE(models_equal(a, init_mlp(cfg)));

  // Sample stddev of the 200x256 block should sit near sqrt(2/256).
  double sq = 0.0;
  for (double v : a.weights[0].data()) sq += v * v;
  const double sample_std = std::sqrt(sq / static_cast<double>(a.weights[0].data().size()));
  CHECK(sample_std == doctest::Approx(std::sqrt(2.0 / 256.0)).epsilon(0.05));

  cfg.activation = Activation::Tanh;
  const Mlp t = init_mlp(cfg);
  sq = 0.0;
  for (double v : t.weights[0].data()) sq += v * v;
  const double tanh_std = std::sqrt(sq / static_cast<double>(t.weights[0].data().size()));
  CHECK(tanh_std == doctest::Approx(std::sqrt(1.0 / 256.0)).epsilon(0.05));
}

TEST_CASE("bad layer configurations are rejected") {
  MlpConfig cfg = small_config(Activation::Relu, 1);
  cfg.hidden = {};
  CHECK_THROWS_WITH_AS(init_mlp(cfg), doctest::Contains("hidden"), std::invalid_argument);
  cfg = small_config(Activation::Relu, 1);
  cfg.hidden = {4, 0};
  CHECK_THROWS_AS(init_mlp(cfg), std::invalid_argument);
  cfg = small_config(Activation::Relu, 1);
  cfg.output_dim = 1;
  CHECK_THROWS_AS(init_mlp(cfg), std::invalid_argument);
  cfg = small_config(Activation::Relu, 1);
  cfg.input_dim = 0;
  CHECK_THROWS_AS(init_mlp(cfg), std::invalid_argument);
}

TEST_CASE("zero weights produce uniform predictions") {
  Mlp model = init_mlp(small_config(Activation::Relu, 83));
  for (auto& w : model.weights)
    for (double& v : w.data()) v = 0.0;
  const Matrix features = Matrix::from_rows({{0.3, -1.2}, {5.0, 2.0}});
  const LogitBatch logits = forward(model, features);
  for (double v : logits.values.data()) CHECK(v == 0.0);
  const ProbBatch p = softmax(logits);
  for (double v : p.values.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("a single affine layer reproduces the matrix product") {
  Mlp model;
  model.config.input_dim = 3;
  model.weights.push_back(Matrix::from_rows({{1.0, 2.0, 3.0}, {-1.0, 0.5, 0.0}}));
  model.biases.push_back({0.25, -0.75});
  const Matrix x = Matrix::from_rows({{1.0, 1.0, 1.0}, {2.0, 0.0, -1.0}});
  const LogitBatch out = forward(model, x);
  CHECK(out.values(0, 0) == doctest::Approx(6.25).epsilon(1e-15));
  CHECK(out.values(0, 1) == doctest::Approx(-1.25).epsilon(1e-15));
  CHECK(out.values(1, 0) == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK(out.values(1, 1) == doctest::Approx(-2.75).epsilon(1e-15));
}

TEST_CASE("batch forward equals row-by-row forward") {
  Rng rng(84);
  const Mlp model = init_mlp(small_config(Activation::Tanh, 84));
  Matrix features(5, 2);
  for (double& v : features.data()) v = rng.normal();
  const LogitBatch batch = forward(model, features);
  for (std::size_t r = 0; r < 5; ++r) {
    Matrix row(1, 2);
    row(0, 0) = features(r, 0);
    row(0, 1) = features(r, 1);
    const LogitBatch single = forward(model, row);
    for (std::size_t c = 0; c < 3; ++c) CHECK(single.values(0, c) == batch.values(r, c));
  }
}

TEST_CASE("forward rejects mismatched feature width") {
  const Mlp model = init_mlp(small_config(Activation::Relu, 85));
  CHECK_THROWS_WITH_AS(forward(model, Matrix(2, 3)), doctest::Contains("input_dim"),
                       std::invalid_argument);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  const Mlp model = init_mlp(small_config(Activation::Relu, 86));
  ForwardCache cache;
  const Matrix x = Matrix::from_rows({{0.5, -0.25}, {1.5, 2.0}});
  forward(model, x, &cache);
  const MlpGradients grads = backward(model, cache, Matrix(2, 3));
  for (const auto& gw : grads.weights)
    for (double v : gw.data()) CHECK(v == 0.0);
  for (const auto& gb : grads.biases)
    for (double v : gb) CHECK(v == 0.0);
}

TEST_CASE("backward validates its inputs") {
  const Mlp model = init_mlp(small_config(Activation::Relu, 86));
  ForwardCache cache;
  forward(model, Matrix::from_rows({{0.5, -0.25}}), &cache);
  CHECK_THROWS_WITH_AS(backward(model, cache, Matrix(1, 4)), doctest::Contains("shape"),
                       std::invalid_argument);
  ForwardCache shallow;
  CHECK_THROWS_WITH_AS(backward(model, shallow, Matrix(1, 3)), doctest::Contains("depth"),
                       std::invalid_argument);
}

TEST_CASE("full network gradients match finite differences") {
  // Smooth activation keeps the central difference valid everywhere.
  Rng rng(87);
  const LossSpec kinds[] = {
      LossSpec{LossKind::CrossEntropy, 0.0, {}},
      LossSpec{LossKind::Focal, 2.0, {}},
      LossSpec{LossKind::RAurc, 0.0, RAurcConfig{0.5, CsfKind::MSP, SoftRankConfig{0.05}}},
  };
  for (const LossSpec& spec : kinds) {
    for (int trial = 0; trial < 5; ++trial) {
      Mlp model = init_mlp(small_config(Activation::Tanh, 870 + static_cast<std::uint64_t>(trial)));
      const std::size_t n = 4 + static_cast<std::size_t>(trial);
      Matrix features(n, 2);
      for (double& v : features.data()) v = rng.normal();
      const LabelBatch labels = random_labels(rng, n, 3);
      CHECK(mlp_fd_worst(model, features, labels, spec) <= 1e-4);
    }
  }
}

TEST_CASE("rectified units match finite differences away from the kink") {
  // Positive weights, inputs and biases keep every pre-activation strictly
  // positive, so the probe never crosses the nondifferentiable point.
  Mlp model = init_mlp(small_config(Activation::Relu, 88));
  for (auto& w : model.weights)
    for (double& v : w.data()) v = 0.2 + std::abs(v);
  for (auto& b : model.biases)
    for (double& v : b) v = 0.3;
  const Matrix features = Matrix::from_rows({{0.5, 1.0}, {1.5, 0.25}, {0.75, 0.75}});
  const LabelBatch labels = make_label_batch({0, 2, 1}, 3);
  CHECK(mlp_fd_worst(model, features, labels, LossSpec{LossKind::CrossEntropy, 0.0, {}}) <= 1e-4);
}

TEST_CASE("softmax backward matches finite differences") {
  Rng rng(89);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform_int(0, 3));
    LogitBatch z = random_logit_batch(rng, n, k, 2.0);
    Matrix upstream(n, k);
    for (double& v : upstream.data()) v = rng.uniform(-1.0, 1.0);

    const Matrix analytic = softmax_backward(softmax(z), upstream);
    const auto value = [&] {
      const ProbBatch p = softmax(z);
      double total = 0.0;
      for (std::size_t i = 0; i < p.values.data().size(); ++i)
        total += p.values.data()[i] * upstream.data()[i];
      return total;
    };
    CHECK(max_grad_rel_err(z.values.data(), value, analytic.data()) <= 1e-6);
  }
  CHECK_THROWS_WITH_AS(softmax_backward(softmax(random_logit_batch(rng, 2, 3, 1.0)), Matrix(2, 2)),
                       doctest::Contains("shape"), std::invalid_argument);
}

TEST_CASE("training is reproducible given seeds") {
  const Dataset data = mixture_dataset(3, 1.65, 90, 120);
  const MlpConfig cfg = small_config(Activation::Relu, 91);
  SgdConfig sgd;
  sgd.lr = 0.05;
  sgd.batch_size = 32;
  sgd.epochs = 3;
  sgd.seed = 92;
  const LossSpec spec{LossKind::CrossEntropy, 0.0, {}};
  const TrainResult a = train(data, spec, cfg, sgd);
  const TrainResult b = train(data, spec, cfg, sgd);
  CHECK(models_equal(a.model, b.model));
  REQUIRE(a.log.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(a.log[e].train_loss == b.log[e].train_loss);
    CHECK(a.log[e].accuracy == b.log[e].accuracy);
    CHECK(a.log[e].ece15 == b.log[e].ece15);
    CHECK(a.log[e].cwece15 == b.log[e].cwece15);
  }
}

TEST_CASE("zero epochs returns the untouched initialization") {
  const Dataset data = mixture_dataset(3, 1.65, 93, 40);
  const MlpConfig cfg = small_config(Activation::Relu, 94);
  SgdConfig sgd;
  sgd.epochs = 0;
  const TrainResult result = train(data, LossSpec{LossKind::CrossEntropy, 0.0, {}}, cfg, sgd);
  CHECK(models_equal(result.model, init_mlp(cfg)));
  CHECK(result.log.empty());
}

TEST_CASE("milestones override the base learning rate") {
  const Dataset data = mixture_dataset(3, 1.65, 95, 64);
  const MlpConfig cfg = small_config(Activation::Relu, 96);
  const LossSpec spec{LossKind::CrossEntropy, 0.0, {}};

  // A milestone at epoch 0 is indistinguishable from using its rate as base.
  SgdConfig with_milestone;
  with_milestone.lr = 0.5;
  with_milestone.schedule = {{0, 0.01}};
  with_milestone.batch_size = 32;
  with_milestone.epochs = 2;
  with_milestone.seed = 97;
  SgdConfig plain = with_milestone;
  plain.lr = 0.01;
  plain.schedule = {};
  CHECK(models_equal(train(data, spec, cfg, with_milestone).model,
                     train(data, spec, cfg, plain).model));

  // Dropping the rate to zero freezes the parameters from that epoch on.
  SgdConfig frozen;
  frozen.lr = 0.05;
  frozen.schedule = {{1, 0.0}};
  frozen.batch_size = 32;
  frozen.epochs = 4;
  frozen.seed = 98;
  SgdConfig one_epoch = frozen;
  one_epoch.schedule = {};
  one_epoch.epochs = 1;
  const TrainResult long_run = train(data, spec, cfg, frozen);
  CHECK(models_equal(long_run.model, train(data, spec, cfg, one_epoch).model));
  // The frozen epochs see an unchanged model: identical full-set metrics.
  CHECK(long_run.log[1].accuracy == long_run.log[3].accuracy);
  CHECK(long_run.log[1].ece15 == long_run.log[3].ece15);
}

TEST_CASE("a single step moves parameters along the gradient") {
  const Dataset data = mixture_dataset(3, 1.65, 99, 8);
  const MlpConfig cfg = small_config(Activation::Tanh, 100);
  SgdConfig sgd;
  sgd.lr = 1e-6;
  sgd.momentum = 0.0;
  sgd.weight_decay = 0.0;
  sgd.batch_size = 8;
  sgd.epochs = 1;
  sgd.seed = 101;
  const LossSpec spec{LossKind::CrossEntropy, 0.0, {}};
  const TrainResult result = train(data, spec, cfg, sgd);

  // Replicate the single shuffled batch and its analytic gradient.
  std::vector<std::size_t> order(8);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(sgd.seed);
  shuffle_rng.shuffle(order);
  Matrix bx(8, 2);
  std::vector<int> by(8);
  for (std::size_t r = 0; r < 8; ++r) {
    bx(r, 0) = data.features(order[r], 0);
    bx(r, 1) = data.features(order[r], 1);
    by[r] = data.labels.classes[order[r]];
  }
  const Mlp init = init_mlp(cfg);
  const MlpGradients grads = net_gradients(init, bx, make_label_batch(by, 3), spec);
  for (std::size_t l = 0; l < init.weights.size(); ++l) {
    for (std::size_t i = 0; i < init.weights[l].data().size(); ++i) {
      const double expected = init.weights[l].data()[i] - sgd.lr * grads.weights[l].data()[i];
      CHECK(result.model.weights[l].data()[i] == expected);
    }
    for (std::size_t i = 0; i < init.biases[l].size(); ++i) {
      const double expected = init.biases[l][i] - sgd.lr * grads.biases[l][i];
      CHECK(result.model.biases[l][i] == expected);
    }
  }
}

TEST_CASE("weight decay adds its term to the update exactly") {
  const Dataset data = mixture_dataset(3, 1.65, 102, 16);
  const MlpConfig cfg = small_config(Activation::Relu, 103);
  SgdConfig sgd;
  sgd.lr = 1e-3;
  sgd.momentum = 0.0;
  sgd.weight_decay = 0.0;
  sgd.batch_size = 16;
  sgd.epochs = 1;
  sgd.seed = 104;
  SgdConfig decayed = sgd;
  decayed.weight_decay = 0.3;
  const LossSpec spec{LossKind::CrossEntropy, 0.0, {}};
  const Mlp plain = train(data, spec, cfg, sgd).model;
  const Mlp shrunk = train(data, spec, cfg, decayed).model;
  const Mlp init = init_mlp(cfg);
  for (std::size_t l = 0; l < init.weights.size(); ++l)
    for (std::size_t i = 0; i < init.weights[l].data().size(); ++i) {
      const double gap = plain.weights[l].data()[i] - shrunk.weights[l].data()[i];
      CHECK(gap == doctest::Approx(sgd.lr * 0.3 * init.weights[l].data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("rank-weighted objective at lambda zero matches the plain trajectory") {
  const Dataset data = mixture_dataset(3, 1.65, 105, 96);
  const MlpConfig cfg = small_config(Activation::Relu, 106);
  SgdConfig sgd;
  sgd.lr = 0.05;
  sgd.batch_size = 32;
  sgd.epochs = 3;
  sgd.seed = 107;
  const LossSpec xe{LossKind::CrossEntropy, 0.0, {}};
  const LossSpec raurc{LossKind::RAurc, 0.0, RAurcConfig{0.0, CsfKind::MSP, SoftRankConfig{0.05}}};
  const TrainResult a = train(data, xe, cfg, sgd);
  const TrainResult b = train(data, raurc, cfg, sgd);
  CHECK(models_equal(a.model, b.model));
  for (std::size_t e = 0; e < a.log.size(); ++e)
    CHECK(a.log[e].train_loss == b.log[e].train_loss);
}

TEST_CASE("separable two-class mixtures train to high accuracy") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset data = mixture_dataset(2, 4.0, 1080 + seed, 300);
    MlpConfig cfg;
    cfg.input_dim = 2;
    cfg.hidden = {16};
    cfg.output_dim = 2;
    cfg.activation = Activation::Relu;
    cfg.init_seed = 1090 + seed;
    SgdConfig sgd;
    sgd.lr = 0.05;
    sgd.batch_size = 32;
    sgd.epochs = 30;
    sgd.seed = 1100 + seed;
    const TrainResult result = train(data, LossSpec{LossKind::CrossEntropy, 0.0, {}}, cfg, sgd);
    CHECK(result.log.back().accuracy >= 0.99);
  }
}

TEST_CASE("rank-weighted training on an overlapping mixture stays finite") {
  const Dataset data = mixture_dataset(3, 1.65, 111, 400);
  MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden = {16};
  cfg.output_dim = 3;
  cfg.activation = Activation::Relu;
  cfg.init_seed = 112;
  SgdConfig sgd;
  sgd.lr = 0.05;
  sgd.batch_size = 64;
  sgd.epochs = 12;
  sgd.seed = 113;
  const LossSpec raurc{LossKind::RAurc, 0.0, RAurcConfig{0.5, CsfKind::MSP, SoftRankConfig{0.05}}};
  const TrainResult result = train(data, raurc, cfg, sgd);
  REQUIRE(result.log.size() == 12);
  for (const EpochLog& log : result.log) {
    CHECK(std::isfinite(log.train_loss));
    CHECK(std::isfinite(log.ece15));
  }
  CHECK(result.log.back().accuracy >= 0.6);
  CHECK(result.log.back().train_loss <= result.log.front().train_loss);
}

TEST_CASE("divergence aborts with epoch and batch diagnostics") {
  const Dataset data = mixture_dataset(3, 1.65, 114, 32);
  const MlpConfig cfg = small_config(Activation::Relu, 115);
  SgdConfig sgd;
  sgd.lr = 1e308;
  sgd.batch_size = 8;
  sgd.epochs = 20;
  sgd.seed = 116;
  CHECK_THROWS_WITH_AS(train(data, LossSpec{LossKind::CrossEntropy, 0.0, {}}, cfg, sgd),
                       doctest::Contains("training diverged"), std::runtime_error);
}

TEST_CASE("training inputs are validated") {
  const Dataset data = mixture_dataset(3, 1.65, 117, 16);
  const MlpConfig cfg = small_config(Activation::Relu, 118);
  const LossSpec spec{LossKind::CrossEntropy, 0.0, {}};

  Dataset mismatched = data;
  mismatched.labels = make_label_batch({0, 1}, 3);
  CHECK_THROWS_WITH_AS(train(mismatched, spec, cfg, SgdConfig{}),
                       doctest::Contains("differ in length"), std::invalid_argument);

  Dataset wrong_classes = data;
  wrong_classes.labels = make_label_batch(std::vector<int>(16, 0), 2);
  CHECK_THROWS_WITH_AS(train(wrong_classes, spec, cfg, SgdConfig{}),
                       doctest::Contains("output_dim"), std::invalid_argument);

  SgdConfig bad = SgdConfig{};
  bad.lr = 0.0;
  CHECK_THROWS_AS(train(data, spec, cfg, bad), std::invalid_argument);
  bad = SgdConfig{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(data, spec, cfg, bad), std::invalid_argument);
  bad = SgdConfig{};
  bad.epochs = -1;
  CHECK_THROWS_AS(train(data, spec, cfg, bad), std::invalid_argument);
}

TEST_CASE("checkpoints round trip exactly") {
  MlpConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden = {5, 4};
  cfg.output_dim = 2;
  cfg.activation = Activation::Tanh;
  cfg.init_seed = 119;
  const Mlp model = init_mlp(cfg);

  TempDir dir("selcal_test_trainer");
  const auto path = dir.path / "model.ckpt";
  save_mlp(path, model);
  const Mlp loaded = load_mlp(path);
  CHECK(loaded.config.input_dim == cfg.input_dim);
  CHECK(loaded.config.hidden == cfg.hidden);
  CHECK(loaded.config.output_dim == cfg.output_dim);
  CHECK(loaded.config.activation == cfg.activation);
  CHECK(loaded.config.init_seed == cfg.init_seed);
  CHECK(models_equal(model, loaded));
}

TEST_CASE("corrupt checkpoints are rejected") {
  TempDir dir("selcal_test_trainer_bad");
  CHECK_THROWS_WITH_AS(load_mlp(dir.path / "missing.ckpt"), doctest::Contains("cannot open"),
                       std::runtime_error);

  const auto garbled = dir.path / "garbled.ckpt";
  write_file(garbled, "not json\n1 2 3\n");
  CHECK_THROWS_WITH_AS(load_mlp(garbled), doctest::Contains("header"), std::runtime_error);

  const auto truncated = dir.path / "truncated.ckpt";
  write_file(truncated,
             "{\"input_dim\":2,\"hidden\":[4],\"output_dim\":3,\"activation\":\"relu\","
             "\"init_seed\":0}\n0.5 0.25\n");
  CHECK_THROWS_WITH_AS(load_mlp(truncated), doctest::Contains("truncated"), std::runtime_error);
}
