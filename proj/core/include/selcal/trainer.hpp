#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "selcal/losses.hpp"
#include "selcal/types.hpp"

namespace selcal {

enum class Activation { Relu, Tanh };

Activation parse_activation(const std::string& name);  // relu | tanh
std::string activation_name(Activation a);

struct MlpConfig {
  int input_dim = 2;
  std::vector<int> hidden = {16};  // at least one hidden layer
  int output_dim = 3;
  Activation activation = Activation::Relu;
  std::uint64_t init_seed = 0;
};

// Fully connected net; weights[l] is fan_out x fan_in.
struct Mlp {
  MlpConfig config;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

// Fan-in-scaled normal init (variance 2/fan_in for relu, 1/fan_in for tanh),
// zero biases, seeded.
Mlp init_mlp(const MlpConfig& cfg);

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // activations per layer; last entry = logits
};

// Logits are returned unvalidated on purpose: the training loop checks
// finiteness itself so divergence produces a diagnostic, not a type error.
LogitBatch forward(const Mlp& model, const Matrix& features, ForwardCache* cache = nullptr);

struct MlpGradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

MlpGradients backward(const Mlp& model, const ForwardCache& cache, const Matrix& dl_dlogits);

// dL/dz = p .* g - (p . g) p per row, composing dL/dp with the softmax
// Jacobian.
Matrix softmax_backward(const ProbBatch& p, const Matrix& dl_dp);

// Learning rate changes at epoch milestones; base lr applies before the
// first milestone.
struct LrMilestone {
  int epoch = 0;
  double lr = 0.0;
};

struct SgdConfig {
  double lr = 0.01;
  std::vector<LrMilestone> schedule;  // piecewise-constant overrides
  double momentum = 0.9;
  double weight_decay = 5e-4;  // additive wd * theta in the gradient
  int batch_size = 128;
  int epochs = 50;
  std::uint64_t seed = 0;  // shuffling
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's batches
  double accuracy = 0.0;
  double ece15 = 0.0;
  double cwece15 = 0.0;
};

struct TrainResult {
  Mlp model;
  std::vector<EpochLog> log;
};

// Mini-batch SGD with momentum and decoupled weight decay. Deterministic
// given (init seed, shuffle seed); single-threaded. The rank-weighted losses
// see one mini-batch at a time (n = batch size in the rank normalization).
// A non-finite batch loss aborts with the epoch and batch index.
TrainResult train(const Dataset& data, const LossSpec& loss, const MlpConfig& mlp_cfg,
                  const SgdConfig& sgd);

// Checkpoint: one JSON header line (shapes, activation, seed), then one
// whitespace-separated text line per tensor in layer order.
void save_mlp(const std::filesystem::path& path, const Mlp& model);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace selcal
