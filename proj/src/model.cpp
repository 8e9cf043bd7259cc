#include "gpn/model.hpp"

#include <cmath>

#include "gpn/errors.hpp"

namespace gpn {

RegKind parse_reg_kind(std::string_view name) {
  if (name == "none") return RegKind::kNone;
  if (name == "r_d") return RegKind::kDistance;
  if (name == "r_alpha") return RegKind::kAlpha;
  throw ContractViolation("unknown reg_kind '" + std::string(name) + "'");
}

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::kNone: return "none";
    case RegKind::kDistance: return "r_d";
    case RegKind::kAlpha: return "r_alpha";
  }
  return "unknown";
}

void LossConfig::validate() const {
  if (!std::isfinite(lambda1) || lambda1 < 0.0 || !std::isfinite(lambda2) || lambda2 < 0.0) {
    throw ContractViolation("loss weights must be finite and nonnegative");
  }
}

ModelParams ModelParams::init(const ModelShape& shape, const std::vector<double>& class_counts,
                              const DiffusionConfig& diffusion, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.diffusion = diffusion;
  p.encoder = shape.linear_encoder
                  ? EncoderParams::linear_map(shape.input_dim, shape.latent_dim, rng)
                  : EncoderParams::mlp(shape.input_dim, shape.hidden_dim, shape.latent_dim,
                                       shape.activation, rng);
  for (double count : class_counts) {
    p.flows.push_back(ClassFlow::init(shape.latent_dim, shape.flow_layers, count, rng));
  }
  p.validate();
  return p;
}

std::vector<NamedTensor> ModelParams::named() {
  std::vector<NamedTensor> out = encoder.named();
  for (std::size_t k = 0; k < flows.size(); ++k) {
    auto f = flows[k].named("flow" + std::to_string(k));
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

void ModelParams::validate() const {
  if (flows.empty()) throw ContractViolation("model has no class flows");
  for (const auto& f : flows) {
    if (f.class_count < 0.0) throw ContractViolation("negative class count");
    for (const auto& layer : f.layers) {
      if (layer.latent_dim() != latent_dim()) {
        throw ContractViolation("flow latent dimension " + std::to_string(layer.latent_dim()) +
                                " does not match encoder output " + std::to_string(latent_dim()));
      }
    }
  }
  if (!(diffusion.teleport > 0.0 && diffusion.teleport <= 1.0)) {
    throw ContractViolation("teleport must lie in (0, 1]");
  }
}

ForwardOutput forward(Var x, const NormalizedAdjacency& adj, ModelParams& p) {
  if (adj.matrix.rows != x.rows()) {
    throw ContractViolation("forward: " + std::to_string(x.rows()) + " feature rows but graph has " +
                            std::to_string(adj.matrix.rows) + " nodes");
  }
  ForwardOutput out;
  out.z = encode(x, p.encoder);
  FeatureEvidence ev = feature_evidence(out.z, p.flows);
  out.beta_feat = ev.beta;
  out.alpha_feat = ev.alpha;
  out.alpha = ppr_diffuse(ev.beta, adj, p.diffusion.teleport, p.diffusion.layers) + 1.0;
  return out;
}

namespace {

struct EdgeEnds {
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
};

EdgeEnds edge_ends(const Graph& g) {
  EdgeEnds e;
  e.src.reserve(g.num_edges());
  e.dst.reserve(g.num_edges());
  for (const auto& [i, j] : g.edges()) {
    e.src.push_back(i);
    e.dst.push_back(j);
  }
  return e;
}

}  // namespace

Var r_distance(Var z, const Graph& g) {
  if (z.rows() != g.num_nodes()) {
    throw ContractViolation("r_distance: latent has " + std::to_string(z.rows()) +
                            " rows, graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
  if (g.num_edges() == 0) return z.tape().constant(Tensor::scalar(0.0));
  const EdgeEnds e = edge_ends(g);
  Var d = ops::gather_rows(z, e.src) - ops::gather_rows(z, e.dst);
  return ops::sum(ops::square(d));
}

Var r_alpha(Var alpha_feat, const Graph& g) {
  if (alpha_feat.rows() != g.num_nodes()) {
    throw ContractViolation("r_alpha: alpha has " + std::to_string(alpha_feat.rows()) +
                            " rows, graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
  if (g.num_edges() == 0) return alpha_feat.tape().constant(Tensor::scalar(0.0));
  const EdgeEnds e = edge_ends(g);
  Var a = ops::gather_rows(alpha_feat, e.src);
  Var b = ops::gather_rows(alpha_feat, e.dst);
  return ops::sum(dirichlet::kl_rows(a, b) + dirichlet::kl_rows(b, a));
}

LossTerms total_loss(const ForwardOutput& out, const LabelSet& y, const Graph& g,
                     const LossConfig& cfg) {
  cfg.validate();
  LossTerms terms;
  Var total = dirichlet::uce(out.alpha, y);
  terms.uce = total.item();
  if (cfg.lambda1 != 0.0) {
    const std::vector<std::size_t> rows = y.selected();
    if (!rows.empty()) {
      Var h = ops::sum(dirichlet::entropy_rows(ops::gather_rows(out.alpha, rows)));
      terms.entropy = h.item();
      total = total - h * cfg.lambda1;
    }
  }
  if (cfg.lambda2 != 0.0 && cfg.reg_kind != RegKind::kNone) {
    Var reg = cfg.reg_kind == RegKind::kDistance ? r_distance(out.z, g) : r_alpha(out.alpha_feat, g);
    terms.reg = reg.item();
    total = total + reg * cfg.lambda2;
  }
  terms.total = total;
  return terms;
}

}  // namespace gpn
