#include "gpn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gpn/errors.hpp"

namespace gpn {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ContractViolation("lr must be > 0");
  if (patience < 1) throw ContractViolation("patience must be >= 1");
  if (max_epochs < 1) throw ContractViolation("max_epochs must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ContractViolation("adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ContractViolation("adam_eps must be > 0");
  if (!(weight_decay >= 0.0)) throw ContractViolation("weight_decay must be >= 0");
  if (latent_dim == 0 || (!linear_encoder && hidden_dim == 0)) {
    throw ContractViolation("encoder dimensions must be positive");
  }
  if (!(diffusion.teleport > 0.0 && diffusion.teleport <= 1.0)) {
    throw ContractViolation("teleport must lie in (0, 1]");
  }
  loss.validate();
}

void adam_step(const std::vector<NamedTensor>& params, AdamState& state, const TrainConfig& cfg) {
  for (const auto& p : params) {
    for (double g : p.tensor->grad()) {
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in tensor '" + p.name + "'");
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor->size(), 0.0);
      state.v.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ContractViolation("adam state does not match parameter list");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.adam_beta2, t);
  const double decay = 1.0 - cfg.lr * cfg.weight_decay;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& w = *params[k].tensor;
    const auto g = w.grad();
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != w.size()) throw ContractViolation("adam moments shaped unlike '" + params[k].name + "'");
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (cfg.weight_decay != 0.0) w[i] *= decay;
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

double validation_ce(const ConcentrationMatrix& alpha, const std::vector<int>& labels,
                     const std::vector<bool>& val_mask) {
  if (labels.size() != alpha.num_nodes() || val_mask.size() != alpha.num_nodes()) {
    throw ContractViolation("validation_ce: label/mask length does not match alpha rows");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < val_mask.size(); ++i) {
    if (!val_mask[i]) continue;
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= alpha.num_classes()) {
      throw ContractViolation("validation_ce: node " + std::to_string(i) + " has no ID label");
    }
    total -= std::log(alpha.alpha()(i, static_cast<std::size_t>(y)) / alpha.alpha0()[i]);
    ++count;
  }
  if (count == 0) throw ContractViolation("validation_ce: empty validation mask");
  return total / static_cast<double>(count);
}

double TrainHistory::best_val_ce() const {
  if (best_epoch == 0 || best_epoch > epochs.size()) return std::numeric_limits<double>::quiet_NaN();
  return epochs[best_epoch - 1].val_ce;
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_ce\n";
  for (const auto& e : epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_ce << '\n';
  return out.str();
}

bool EarlyStopper::observe(std::size_t epoch, double value) {
  if (value < best_) {
    best_ = value;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

ModelParams init_params(const Dataset& ds, const TrainConfig& cfg) {
  ModelShape shape;
  shape.input_dim = ds.num_features();
  shape.hidden_dim = cfg.hidden_dim;
  shape.latent_dim = cfg.latent_dim;
  shape.flow_layers = cfg.flow_layers;
  shape.linear_encoder = cfg.linear_encoder;
  shape.activation = cfg.activation;
  return ModelParams::init(shape, ds.class_counts(), cfg.diffusion, cfg.seed);
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  ds.require_trainable();
  const NormalizedAdjacency adj = normalize(ds.graph);
  const LabelSet train_labels = ds.train_labels();

  TrainResult result{init_params(ds, cfg), {}};
  ModelParams params = result.params;
  const std::vector<NamedTensor> named = params.named();
  AdamState adam;
  EarlyStopper stopper(cfg.patience);
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (const auto& p : named) p.tensor->zero_grad();
    Tape tape;
    ForwardOutput out = forward(tape.constant(ds.features), adj, params);
    LossTerms terms = total_loss(out, train_labels, ds.graph, cfg.loss);
    const double loss = terms.total.item();
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << ": uce=" << terms.uce
          << " entropy=" << terms.entropy << " reg=" << terms.reg;
      throw TrainingError(msg.str());
    }
    const double val_ce =
        validation_ce(ConcentrationMatrix(out.alpha.value()), ds.labels, ds.val_mask);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.epochs.push_back({epoch, loss, val_ce, seconds});
    if (stopper.observe(epoch, val_ce)) result.params = params;
    if (stopper.should_stop()) break;

    tape.backward(terms.total);
    try {
      adam_step(named, adam, cfg);
    } catch (const TrainingError& e) {
      throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
    }
  }
  result.history.best_epoch = stopper.best_epoch();
  return result;
}

Prediction predict(const Dataset& ds, ModelParams& params) {
  const NormalizedAdjacency adj = normalize(ds.graph);
  Tape tape;
  ForwardOutput out = forward(tape.constant(ds.features), adj, params);
  return Prediction{out.z.value(), out.alpha_feat.value(), out.alpha.value()};
}

EvalReport evaluate(const Dataset& ds, const Prediction& pred) {
  const bool has_ood = std::any_of(ds.ood_mask.begin(), ds.ood_mask.end(), [](bool b) { return b; });
  if (has_ood) return eval_ood(pred, ds.labels, ds.ood_mask, ds.test_mask);
  return eval_misclassification(pred, ds.labels, ds.test_mask);
}

}  // namespace gpn
