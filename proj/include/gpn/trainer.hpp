#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gpn/data.hpp"
#include "gpn/metrics.hpp"
#include "gpn/model.hpp"

namespace gpn {

struct TrainConfig {
  double lr = 0.01;
  std::size_t max_epochs = 2000;
  std::size_t patience = 50;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  LossConfig loss;
  Activation activation = Activation::kRelu;
  std::uint64_t seed = 0;

  // Architecture.
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 16;
  std::size_t flow_layers = 8;
  bool linear_encoder = false;
  DiffusionConfig diffusion;

  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

// One Adam update with bias correction, reading gradients from each tensor's
// grad buffer. Decoupled weight decay p *= (1 - lr * wd) is applied before the
// moment update. Throws TrainingError naming the first tensor with a
// non-finite gradient; no parameter is modified in that case.
void adam_step(const std::vector<NamedTensor>& params, AdamState& state, const TrainConfig& cfg);

// Mean over val_mask of -log(alpha_{i,y_i} / alpha_i0).
double validation_ce(const ConcentrationMatrix& alpha, const std::vector<int>& labels,
                     const std::vector<bool>& val_mask);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_ce = 0.0;
  double seconds = 0.0;   // wall clock since training started
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based

  double best_val_ce() const;
  // "epoch,train_loss,val_ce" rows, wall clock omitted.
  std::string to_csv() const;
};

// Patience-based stopping on a metric to minimise. Only strict improvements
// reset the counter.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Returns true when `value` is a new best.
  bool observe(std::size_t epoch, double value);
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
};

// Parameters as initialised by train() for this dataset and config.
ModelParams init_params(const Dataset& ds, const TrainConfig& cfg);

struct TrainResult {
  ModelParams params;  // from the best-validation epoch
  TrainHistory history;
};

// Full-graph training of the objective in cfg.loss. Each epoch evaluates the
// current parameters (train loss and validation CE), keeps a copy when the
// validation CE improves, then takes one Adam step.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

// Forward pass without gradients.
Prediction predict(const Dataset& ds, ModelParams& params);

// OOD protocol when the dataset has OOD nodes, misclassification otherwise;
// both evaluate on the test mask.
EvalReport evaluate(const Dataset& ds, const Prediction& pred);

}  // namespace gpn
