#include "gpn/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "gpn/errors.hpp"
#include "gpn/special.hpp"

namespace gpn {

namespace {

Tensor glorot(std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w(fan_out, fan_in);
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  w.set_requires_grad(true);
  return w;
}

Tensor zeros_row(std::size_t n) {
  Tensor b(1, n);
  b.set_requires_grad(true);
  return b;
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "log_sigmoid") return Activation::kLogSigmoid;
  if (name == "gelu") return Activation::kGelu;
  if (name == "hard_tanh") return Activation::kHardTanh;
  throw ContractViolation("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kLogSigmoid: return "log_sigmoid";
    case Activation::kGelu: return "gelu";
    case Activation::kHardTanh: return "hard_tanh";
  }
  return "unknown";
}

double activation_eval(Activation kind, double x) {
  switch (kind) {
    case Activation::kRelu: return std::max(0.0, x);
    case Activation::kLogSigmoid: return special::log_sigmoid(x);
    case Activation::kGelu: return x * special::normal_cdf(x);
    case Activation::kHardTanh: return std::clamp(x, -1.0, 1.0);
  }
  throw ContractViolation("unknown activation");
}

Var apply_activation(Activation kind, Var x) {
  switch (kind) {
    case Activation::kRelu: return ops::relu(x);
    case Activation::kLogSigmoid: return ops::log_sigmoid(x);
    case Activation::kGelu: return ops::gelu(x);
    case Activation::kHardTanh: return ops::hard_tanh(x);
  }
  throw ContractViolation("unknown activation");
}

EncoderParams EncoderParams::mlp(std::size_t input_dim, std::size_t hidden_dim,
                                 std::size_t latent_dim, Activation activation, Rng& rng) {
  EncoderParams p;
  p.activation = activation;
  p.w1 = glorot(hidden_dim, input_dim, rng);
  p.b1 = zeros_row(hidden_dim);
  p.w2 = glorot(latent_dim, hidden_dim, rng);
  p.b2 = zeros_row(latent_dim);
  return p;
}

EncoderParams EncoderParams::linear_map(std::size_t input_dim, std::size_t latent_dim, Rng& rng) {
  EncoderParams p;
  p.linear = true;
  p.w1 = glorot(latent_dim, input_dim, rng);
  return p;
}

std::vector<NamedTensor> EncoderParams::named() {
  if (linear) return {{"encoder.w", &w1}};
  return {{"encoder.w1", &w1}, {"encoder.b1", &b1}, {"encoder.w2", &w2}, {"encoder.b2", &b2}};
}

Var encode(Var x, EncoderParams& p) {
  if (x.cols() != p.input_dim()) {
    throw ContractViolation("encode: features have shape " + x.shape().str() +
                            " but encoder expects " + std::to_string(p.input_dim()) + " columns");
  }
  Tape& tape = x.tape();
  if (p.linear) return ops::matmul(x, ops::transpose(tape.param(p.w1)));
  Var hidden = ops::matmul(x, ops::transpose(tape.param(p.w1))) + tape.param(p.b1);
  hidden = apply_activation(p.activation, hidden);
  return ops::matmul(hidden, ops::transpose(tape.param(p.w2))) + tape.param(p.b2);
}

}  // namespace gpn
