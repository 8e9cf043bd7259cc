#include "gpn/flow.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gpn/errors.hpp"
#include "gpn/special.hpp"

namespace gpn {

RadialLayerParams RadialLayerParams::identity_start(std::size_t latent_dim, Rng& rng,
                                                    double gamma) {
  if (!(gamma > 0.0)) throw ContractViolation("radial layer gamma must be > 0");
  RadialLayerParams p;
  p.gamma = gamma;
  p.z0 = Tensor(1, latent_dim);
  for (double& v : p.z0.values()) v = rng.normal();
  p.z0.set_requires_grad(true);
  p.beta_raw = Tensor::scalar(special::softplus_inverse(gamma));
  p.beta_raw.set_requires_grad(true);
  return p;
}

double RadialLayerParams::beta() const { return -gamma + special::softplus(beta_raw.item()); }

ClassFlow ClassFlow::init(std::size_t latent_dim, std::size_t num_layers, double class_count,
                          Rng& rng) {
  ClassFlow f;
  f.class_count = class_count;
  for (std::size_t l = 0; l < num_layers; ++l) {
    f.layers.push_back(RadialLayerParams::identity_start(latent_dim, rng));
  }
  return f;
}

std::vector<NamedTensor> ClassFlow::named(const std::string& prefix) {
  std::vector<NamedTensor> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    out.push_back({base + ".z0", &layers[l].z0});
    out.push_back({base + ".beta_raw", &layers[l].beta_raw});
  }
  return out;
}

RadialOutput radial_apply(Var z, RadialLayerParams& p) {
  if (z.cols() != p.latent_dim()) {
    throw ContractViolation("radial_apply: latent shape " + z.shape().str() +
                            " does not match reference point " + p.z0.shape().str());
  }
  Tape& tape = z.tape();
  const double gamma = p.gamma;
  const double dims = static_cast<double>(z.cols());

  Var diff = z - tape.param(p.z0);
  Var r = ops::row_norm(diff);
  Var beta = ops::softplus(tape.param(p.beta_raw)) - gamma;
  Var h = tape.constant(Tensor::scalar(1.0)) / (r + gamma);
  Var bh = beta * h;
  Var z_out = z + bh * diff;
  // det = (1 + b h)^(L-1) * (1 + b h + b h' r), h' = -h^2.
  Var radial_term = 1.0 + bh * (1.0 - h * r);
  Var logdet = ops::log(1.0 + bh) * (dims - 1.0) + ops::log(radial_term);
  return {z_out, logdet};
}

std::vector<double> radial_invert(const std::vector<double>& z_out, const RadialLayerParams& p) {
  const std::size_t dims = p.latent_dim();
  if (z_out.size() != dims) throw ContractViolation("radial_invert: dimension mismatch");
  const double b = p.beta();
  const double g = p.gamma;
  double r_out_sq = 0.0;
  for (std::size_t j = 0; j < dims; ++j) {
    const double d = z_out[j] - p.z0[j];
    r_out_sq += d * d;
  }
  const double r_out = std::sqrt(r_out_sq);
  // |z' - z0| = r (1 + b / (g + r))  =>  r^2 + (g + b - r') r - r' g = 0.
  const double c = g + b - r_out;
  const double r = 0.5 * (-c + std::sqrt(c * c + 4.0 * r_out * g));
  const double factor = 1.0 + b / (g + r);
  std::vector<double> z(dims);
  for (std::size_t j = 0; j < dims; ++j) z[j] = p.z0[j] + (z_out[j] - p.z0[j]) / factor;
  return z;
}

Var log_density(Var z, ClassFlow& flow) {
  Var u = z;
  Var total_logdet;
  for (auto& layer : flow.layers) {
    RadialOutput step = radial_apply(u, layer);
    u = step.z;
    total_logdet = total_logdet.valid() ? total_logdet + step.logdet : step.logdet;
  }
  const double dims = static_cast<double>(z.cols());
  Var base = ops::sum_rows(ops::square(u)) * -0.5 - 0.5 * dims * std::log(2.0 * std::numbers::pi);
  return total_logdet.valid() ? base + total_logdet : base;
}

FeatureEvidence feature_evidence(Var z, std::vector<ClassFlow>& flows) {
  if (flows.empty()) throw ContractViolation("feature_evidence: no class flows");
  std::vector<Var> columns;
  columns.reserve(flows.size());
  for (auto& flow : flows) {
    Var logp = ops::clamp(log_density(z, flow), -kLogDensityClamp, kLogDensityClamp);
    columns.push_back(ops::exp(logp) * flow.class_count);
  }
  Var beta = ops::concat_cols(columns);
  return {beta, beta + 1.0};
}

}  // namespace gpn
