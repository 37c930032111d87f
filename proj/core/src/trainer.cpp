#include "selcal/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "selcal/core.hpp"
#include "selcal/io.hpp"
#include "selcal/metrics.hpp"
#include "selcal/rng.hpp"

namespace selcal {

namespace {

std::vector<std::size_t> layer_dims(const MlpConfig& cfg) {
  if (cfg.input_dim < 1) throw std::invalid_argument("mlp: input_dim must be >= 1");
  if (cfg.output_dim < 2) throw std::invalid_argument("mlp: output_dim must be >= 2");
  if (cfg.hidden.empty()) throw std::invalid_argument("mlp: need at least one hidden layer");
  std::vector<std::size_t> dims;
  dims.push_back(static_cast<std::size_t>(cfg.input_dim));
  for (int h : cfg.hidden) {
    if (h < 1) throw std::invalid_argument("mlp: hidden widths must be >= 1");
    dims.push_back(static_cast<std::size_t>(h));
  }
  dims.push_back(static_cast<std::size_t>(cfg.output_dim));
  return dims;
}

double activate(Activation a, double z) {
  return a == Activation::Relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through whichever cached value is cheapest: the
// pre-activation for relu, the activation value for tanh.
double activate_grad(Activation a, double pre, double post) {
  return a == Activation::Relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
}

void append_tensor_line(std::string& out, const std::vector<double>& values) {
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    if (i > 0) out += ' ';
    out += buf;
  }
  out += '\n';
}

double scheduled_lr(const SgdConfig& sgd, int epoch) {
  double lr = sgd.lr;
  for (const LrMilestone& m : sgd.schedule)
    if (m.epoch <= epoch) lr = m.lr;
  return lr;
}

bool all_finite(const Matrix& m) {
  for (double v : m.data())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation '" + name + "' (expected relu|tanh)");
}

std::string activation_name(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

Mlp init_mlp(const MlpConfig& cfg) {
  const auto dims = layer_dims(cfg);
  Mlp model;
  model.config = cfg;
  Rng rng(cfg.init_seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l];
    const std::size_t fan_out = dims[l + 1];
    const double gain = cfg.activation == Activation::Relu ? 2.0 : 1.0;
    const double stddev = std::sqrt(gain / static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (double& v : w.data()) v = stddev * rng.normal();
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

LogitBatch forward(const Mlp& model, const Matrix& features, ForwardCache* cache) {
  if (features.cols() != static_cast<std::size_t>(model.config.input_dim))
    throw std::invalid_argument("forward: feature width does not match input_dim");
  const std::size_t n = features.rows();
  const std::size_t layers = model.weights.size();
  if (cache != nullptr) {
    cache->input = features;
    cache->pre.assign(layers, Matrix());
    cache->post.assign(layers, Matrix());
  }
  Matrix current = features;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = model.weights[l];
    const std::vector<double>& b = model.biases[l];
    Matrix pre(n, w.rows());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t o = 0; o < w.rows(); ++o) {
        double z = b[o];
        for (std::size_t i = 0; i < w.cols(); ++i) z += w(o, i) * current(r, i);
        pre(r, o) = z;
      }
    }
    Matrix post = pre;
    if (l + 1 < layers)
      for (double& v : post.data()) v = activate(model.config.activation, v);
    if (cache != nullptr) {
      cache->pre[l] = pre;
      cache->post[l] = post;
    }
    current = std::move(post);
  }
  LogitBatch out;
  out.values = std::move(current);
  return out;
}

MlpGradients backward(const Mlp& model, const ForwardCache& cache, const Matrix& dl_dlogits) {
  const std::size_t layers = model.weights.size();
  if (cache.pre.size() != layers || cache.post.size() != layers)
    throw std::invalid_argument("backward: cache does not match model depth");
  const Matrix& logits = cache.post.back();
  if (dl_dlogits.rows() != logits.rows() || dl_dlogits.cols() != logits.cols())
    throw std::invalid_argument("backward: upstream gradient shape mismatch");

  MlpGradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);
  const std::size_t n = dl_dlogits.rows();

  Matrix delta = dl_dlogits;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = model.weights[l];
    const Matrix& prev = l == 0 ? cache.input : cache.post[l - 1];
    Matrix gw(w.rows(), w.cols());
    std::vector<double> gb(w.rows(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t o = 0; o < w.rows(); ++o) {
        const double d = delta(r, o);
        gb[o] += d;
        for (std::size_t i = 0; i < w.cols(); ++i) gw(o, i) += d * prev(r, i);
      }
    }
    grads.weights[l] = std::move(gw);
    grads.biases[l] = std::move(gb);
    if (l == 0) break;
    Matrix next(n, w.cols());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < w.cols(); ++i) {
        double d = 0.0;
        for (std::size_t o = 0; o < w.rows(); ++o) d += delta(r, o) * w(o, i);
        next(r, i) =
            d * activate_grad(model.config.activation, cache.pre[l - 1](r, i), prev(r, i));
      }
    }
    delta = std::move(next);
  }
  return grads;
}

Matrix softmax_backward(const ProbBatch& p, const Matrix& dl_dp) {
  if (dl_dp.rows() != p.values.rows() || dl_dp.cols() != p.values.cols())
    throw std::invalid_argument("softmax_backward: gradient shape mismatch");
  Matrix out(dl_dp.rows(), dl_dp.cols());
  for (std::size_t r = 0; r < dl_dp.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < dl_dp.cols(); ++c) dot += p.values(r, c) * dl_dp(r, c);
    for (std::size_t c = 0; c < dl_dp.cols(); ++c)
      out(r, c) = p.values(r, c) * (dl_dp(r, c) - dot);
  }
  return out;
}

TrainResult train(const Dataset& data, const LossSpec& loss, const MlpConfig& mlp_cfg,
                  const SgdConfig& sgd) {
  if (data.features.rows() != data.labels.size())
    throw std::invalid_argument("train: features and labels differ in length");
  if (data.features.rows() == 0) throw std::invalid_argument("train: empty dataset");
  if (data.labels.num_classes != mlp_cfg.output_dim)
    throw std::invalid_argument("train: label class count does not match output_dim");
  if (!(sgd.lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (sgd.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (sgd.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");

  TrainResult result;
  result.model = init_mlp(mlp_cfg);
  Mlp& model = result.model;

  std::vector<Matrix> vel_w;
  std::vector<std::vector<double>> vel_b;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    vel_w.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    vel_b.emplace_back(model.biases[l].size(), 0.0);
  }

  const std::size_t n = data.features.rows();
  const auto bs = static_cast<std::size_t>(sgd.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(sgd.seed);
  const BinningScheme ew15{BinningKind::EqualWidth, 15};

  for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    const double lr = scheduled_lr(sgd, epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < n; start += bs, ++batches) {
      const std::size_t count = std::min(bs, n - start);
      Matrix bx(count, data.features.cols());
      std::vector<int> by_classes(count);
      for (std::size_t r = 0; r < count; ++r) {
        const std::size_t src = order[start + r];
        for (std::size_t j = 0; j < data.features.cols(); ++j)
          bx(r, j) = data.features(src, j);
        by_classes[r] = data.labels.classes[src];
      }
      const LabelBatch by = make_label_batch(by_classes, data.labels.num_classes);

      ForwardCache cache;
      const LogitBatch logits = forward(model, bx, &cache);
      if (!all_finite(logits.values))
        throw std::runtime_error("training diverged: non-finite logits at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(batches));
      const ProbBatch p = softmax(logits);
      const BatchLossGrad bl = evaluate_loss(loss, p, by);
      if (!std::isfinite(bl.value))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(batches));
      loss_sum += bl.value;

      const Matrix dl_dz = softmax_backward(p, bl.grad_p);
      const MlpGradients grads = backward(model, cache, dl_dz);
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        auto& w = model.weights[l].data();
        auto& vw = vel_w[l].data();
        const auto& gw = grads.weights[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
          vw[i] = sgd.momentum * vw[i] + (gw[i] + sgd.weight_decay * w[i]);
          w[i] -= lr * vw[i];
        }
        auto& b = model.biases[l];
        auto& vb = vel_b[l];
        const auto& gb = grads.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
          vb[i] = sgd.momentum * vb[i] + (gb[i] + sgd.weight_decay * b[i]);
          b[i] -= lr * vb[i];
        }
      }
    }

    const LogitBatch full = forward(model, data.features);
    if (!all_finite(full.values))
      throw std::runtime_error("training diverged: non-finite logits at epoch " +
                               std::to_string(epoch) + ", batch " + std::to_string(batches));
    const ProbBatch p = softmax(full);
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(batches);
    log.accuracy = 1.0 - empirical_error(p, data.labels);
    log.ece15 = binned_ece(p, data.labels, ew15);
    log.cwece15 = binned_cwece(p, data.labels, ew15);
    result.log.push_back(log);
  }
  return result;
}

void save_mlp(const std::filesystem::path& path, const Mlp& model) {
  nlohmann::json header;
  header["input_dim"] = model.config.input_dim;
  header["hidden"] = model.config.hidden;
  header["output_dim"] = model.config.output_dim;
  header["activation"] = activation_name(model.config.activation);
  header["init_seed"] = model.config.init_seed;
  std::string out = header.dump();
  out += '\n';
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    append_tensor_line(out, model.weights[l].data());
    append_tensor_line(out, model.biases[l]);
  }
  atomic_write_file(path, out);
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint missing header line");
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object())
    throw std::runtime_error("checkpoint header is not valid JSON");

  MlpConfig cfg;
  cfg.input_dim = header.at("input_dim").get<int>();
  cfg.hidden = header.at("hidden").get<std::vector<int>>();
  cfg.output_dim = header.at("output_dim").get<int>();
  cfg.activation = parse_activation(header.at("activation").get<std::string>());
  cfg.init_seed = header.at("init_seed").get<std::uint64_t>();

  const auto dims = layer_dims(cfg);
  Mlp model;
  model.config = cfg;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l + 1], dims[l]);
    for (double& v : w.data())
      if (!(in >> v)) throw std::runtime_error("checkpoint truncated in weights");
    std::vector<double> b(dims[l + 1]);
    for (double& v : b)
      if (!(in >> v)) throw std::runtime_error("checkpoint truncated in biases");
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  return model;
}

}  // namespace selcal
