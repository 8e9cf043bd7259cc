#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gpn/ops.hpp"
#include "gpn/sparse.hpp"

namespace gpn {

using Edge = std::pair<std::size_t, std::size_t>;

// Immutable undirected graph. Both directions are stored in the CSR arrays;
// neighbour lists are sorted and contain no self-loops.
class Graph {
 public:
  Graph() = default;

  // Deduplicates (i,j)/(j,i) pairs and drops self-loops. Throws LoadError
  // naming the first pair with an index >= num_nodes.
  static Graph build(std::size_t num_nodes, std::span<const Edge> edge_list);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }

  // Each undirected edge once, as (i, j) with i < j, in lexicographic order.
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const std::size_t> neighbors(std::size_t node) const;
  std::size_t degree(std::size_t node) const { return row_ptr_[node + 1] - row_ptr_[node]; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
};

// D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I.
struct NormalizedAdjacency {
  CsrMatrix matrix;
};

NormalizedAdjacency normalize(const Graph& g);

// Personalised-PageRank power iteration
//   beta^{l+1} = (1 - teleport) * A_hat * beta^l + teleport * beta^0
// run for `layers` steps. Teleport must lie in (0, 1].
Var ppr_diffuse(Var beta0, const NormalizedAdjacency& adj, double teleport, std::size_t layers);

// Fraction of edges whose endpoints share a label. A graph without edges
// reports 1.
double homophily(const Graph& g, std::span<const int> labels);

}  // namespace gpn
