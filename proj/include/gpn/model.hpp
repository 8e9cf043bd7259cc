#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gpn/dirichlet.hpp"
#include "gpn/encoder.hpp"
#include "gpn/flow.hpp"
#include "gpn/graph.hpp"

namespace gpn {

enum class RegKind { kNone, kDistance, kAlpha };

// "none", "r_d", "r_alpha".
RegKind parse_reg_kind(std::string_view name);
std::string to_string(RegKind kind);

// Objective: UCE - lambda1 * sum_train H(Dir(alpha_i)) + lambda2 * R.
struct LossConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  RegKind reg_kind = RegKind::kNone;

  void validate() const;
};

struct DiffusionConfig {
  double teleport = 0.1;
  std::size_t layers = 10;
};

struct ModelShape {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 16;
  std::size_t flow_layers = 8;
  bool linear_encoder = false;
  Activation activation = Activation::kRelu;
};

struct ModelParams {
  EncoderParams encoder;
  std::vector<ClassFlow> flows;
  DiffusionConfig diffusion;

  // Encoder weights from a seeded stream, then flows class by class.
  static ModelParams init(const ModelShape& shape, const std::vector<double>& class_counts,
                          const DiffusionConfig& diffusion, std::uint64_t seed);

  std::size_t num_classes() const { return flows.size(); }
  std::size_t latent_dim() const { return encoder.latent_dim(); }

  // Stable order: encoder tensors, then flow tensors class by class.
  std::vector<NamedTensor> named();
  void validate() const;
};

struct ForwardOutput {
  Var z;           // NxL latent
  Var beta_feat;   // NxK feature evidence
  Var alpha_feat;  // beta_feat + 1
  Var alpha;       // diffused evidence + 1
};

// `adj` must outlive any backward pass over the returned values.
ForwardOutput forward(Var x, const NormalizedAdjacency& adj, ModelParams& p);

// Sum over undirected edges of |z_i - z_j|^2.
Var r_distance(Var z, const Graph& g);

// Sum over undirected edges of KL(i||j) + KL(j||i) between Dir(alpha_feat) rows.
Var r_alpha(Var alpha_feat, const Graph& g);

struct LossTerms {
  Var total;
  double uce = 0.0;
  double entropy = 0.0;  // sum over training nodes, before weighting
  double reg = 0.0;      // before weighting
};

LossTerms total_loss(const ForwardOutput& out, const LabelSet& y, const Graph& g,
                     const LossConfig& cfg);

}  // namespace gpn
