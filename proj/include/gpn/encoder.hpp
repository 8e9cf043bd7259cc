#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gpn/gradcheck.hpp"
#include "gpn/ops.hpp"
#include "gpn/random.hpp"

namespace gpn {

enum class Activation { kRelu, kLogSigmoid, kGelu, kHardTanh };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);

// Scalar reference for the hidden-layer nonlinearities.
double activation_eval(Activation kind, double x);

Var apply_activation(Activation kind, Var x);

// Node-feature encoder. In MLP mode
//   z = W2 * act(W1 * x + b1) + b2
// with W1: HxD, W2: LxH. In linear mode only W1 (LxD) is used and there is no
// bias or activation.
struct EncoderParams {
  bool linear = false;
  Activation activation = Activation::kRelu;
  Tensor w1;
  Tensor b1;
  Tensor w2;
  Tensor b2;

  // Glorot-uniform weights, zero biases.
  static EncoderParams mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim,
                           Activation activation, Rng& rng);
  static EncoderParams linear_map(std::size_t input_dim, std::size_t latent_dim, Rng& rng);

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t latent_dim() const { return linear ? w1.rows() : w2.rows(); }

  std::vector<NamedTensor> named();
};

// X is NxD; returns NxL.
Var encode(Var x, EncoderParams& p);

}  // namespace gpn
