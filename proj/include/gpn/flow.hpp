#pragma once

#include <cstddef>
#include <vector>

#include "gpn/gradcheck.hpp"
#include "gpn/ops.hpp"
#include "gpn/random.hpp"

namespace gpn {

// Log-densities are clamped to this symmetric range before exponentiation.
inline constexpr double kLogDensityClamp = 30.0;

// One radial layer  z' = z + b * (z - z0) / (gamma + |z - z0|)  with
// b = -gamma + softplus(beta_raw) >= -gamma, which keeps the map invertible.
struct RadialLayerParams {
  Tensor z0;        // 1xL
  Tensor beta_raw;  // 1x1
  double gamma = 1.0;

  // z0 ~ N(0, I), beta_raw chosen so that b = 0 (identity map).
  static RadialLayerParams identity_start(std::size_t latent_dim, Rng& rng, double gamma = 1.0);

  double beta() const;
  std::size_t latent_dim() const { return z0.cols(); }
};

// Per-class density model: layers map latent space to the standard-normal
// base, applied in order.
struct ClassFlow {
  std::vector<RadialLayerParams> layers;
  double class_count = 0.0;  // N_k, training nodes of this class

  static ClassFlow init(std::size_t latent_dim, std::size_t num_layers, double class_count,
                        Rng& rng);

  std::vector<NamedTensor> named(const std::string& prefix);
};

struct RadialOutput {
  Var z;       // NxL
  Var logdet;  // Nx1, log|det dz'/dz|
};

RadialOutput radial_apply(Var z, RadialLayerParams& p);

// Closed-form inverse of one radial layer for a single point.
std::vector<double> radial_invert(const std::vector<double>& z_out, const RadialLayerParams& p);

// log p(z | class) for each row of z -> Nx1 (unclamped).
Var log_density(Var z, ClassFlow& flow);

struct FeatureEvidence {
  Var beta;   // NxK, N_k * exp(clamped log density)
  Var alpha;  // beta + 1
};

FeatureEvidence feature_evidence(Var z, std::vector<ClassFlow>& flows);

}  // namespace gpn
