#include "gpn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpn/errors.hpp"

namespace gpn {

Graph Graph::build(std::size_t num_nodes, std::span<const Edge> edge_list) {
  Graph g;
  g.num_nodes_ = num_nodes;
  g.edges_.reserve(edge_list.size());
  for (const auto& [i, j] : edge_list) {
    if (i >= num_nodes || j >= num_nodes) {
      throw LoadError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                      ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (i == j) continue;
    g.edges_.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  std::vector<std::size_t> degree(num_nodes, 0);
  for (const auto& [i, j] : g.edges_) {
    ++degree[i];
    ++degree[j];
  }
  g.row_ptr_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) g.row_ptr_[v + 1] = g.row_ptr_[v] + degree[v];
  g.col_idx_.assign(g.row_ptr_.back(), 0);
  std::vector<std::size_t> fill(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
  for (const auto& [i, j] : g.edges_) {
    g.col_idx_[fill[i]++] = j;
    g.col_idx_[fill[j]++] = i;
  }
  for (std::size_t v = 0; v < num_nodes; ++v) {
    std::sort(g.col_idx_.begin() + static_cast<std::ptrdiff_t>(g.row_ptr_[v]),
              g.col_idx_.begin() + static_cast<std::ptrdiff_t>(g.row_ptr_[v + 1]));
  }
  return g;
}

std::span<const std::size_t> Graph::neighbors(std::size_t node) const {
  return std::span<const std::size_t>(col_idx_).subspan(row_ptr_[node], degree(node));
}

NormalizedAdjacency normalize(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t v = 0; v < n; ++v) {
    inv_sqrt_deg[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  }
  CsrMatrix m;
  m.rows = n;
  m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  m.col_idx.reserve(g.col_idx().size() + n);
  m.values.reserve(g.col_idx().size() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool self_done = false;
    for (std::size_t j : g.neighbors(i)) {
      if (!self_done && j > i) {
        m.col_idx.push_back(i);
        m.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
        self_done = true;
      }
      m.col_idx.push_back(j);
      m.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    if (!self_done) {
      m.col_idx.push_back(i);
      m.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
    }
    m.row_ptr[i + 1] = m.col_idx.size();
  }
  return NormalizedAdjacency{std::move(m)};
}

Var ppr_diffuse(Var beta0, const NormalizedAdjacency& adj, double teleport, std::size_t layers) {
  if (!(teleport > 0.0 && teleport <= 1.0)) {
    throw ContractViolation("ppr_diffuse: teleport must lie in (0, 1], got " +
                            std::to_string(teleport));
  }
  if (adj.matrix.cols != beta0.rows()) {
    throw ContractViolation("ppr_diffuse: adjacency has " + std::to_string(adj.matrix.cols) +
                            " nodes but evidence has shape " + beta0.shape().str());
  }
  if (teleport == 1.0) return beta0;
  Var restart = beta0 * teleport;
  Var beta = beta0;
  for (std::size_t l = 0; l < layers; ++l) {
    beta = ops::spmm(adj.matrix, beta) * (1.0 - teleport) + restart;
  }
  return beta;
}

double homophily(const Graph& g, std::span<const int> labels) {
  if (labels.size() != g.num_nodes()) {
    throw ContractViolation("homophily: " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(g.num_nodes()) + " nodes");
  }
  if (g.num_edges() == 0) return 1.0;
  std::size_t same = 0;
  for (const auto& [i, j] : g.edges()) {
    if (labels[i] == labels[j]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

}  // namespace gpn
