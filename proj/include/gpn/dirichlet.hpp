#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "gpn/ops.hpp"
#include "gpn/tensor.hpp"

namespace gpn {

// NxK Dirichlet concentrations, one distribution per row. Entries are > 0.
class ConcentrationMatrix {
 public:
  explicit ConcentrationMatrix(Tensor alpha);

  const Tensor& alpha() const { return alpha_; }
  std::size_t num_nodes() const { return alpha_.rows(); }
  std::size_t num_classes() const { return alpha_.cols(); }
  // Row sums (Dirichlet strength).
  const std::vector<double>& alpha0() const { return alpha0_; }
  // Index of the largest concentration, lowest class index on ties.
  std::size_t argmax(std::size_t row) const;

 private:
  Tensor alpha_;
  std::vector<double> alpha0_;
};

// Class index per node plus the subset of nodes that contribute.
struct LabelSet {
  std::vector<int> labels;
  std::vector<bool> mask;

  std::vector<std::size_t> selected() const;
};

enum class UncertaintyChannel { kAleatoric, kEpistemicOod, kEpistemicMisc };

// "alea", "epi_ood", "epi_misc".
UncertaintyChannel parse_channel(std::string_view name);

namespace dirichlet {

// Uncertainty cross-entropy summed over masked nodes:
// sum_i psi(alpha_i0) - psi(alpha_{i,y_i}).
Var uce(Var alpha, const LabelSet& y);

// Closed-form entropy of each row -> Nx1.
Var entropy_rows(Var alpha);
// Entropy of a single 1xK row -> 1x1.
Var entropy(Var alpha_row);

// KL(Dir(a_i) || Dir(b_i)) for each row pair -> Nx1.
Var kl_rows(Var a, Var b);
// KL for a single pair of 1xK rows -> 1x1.
Var kl(Var a, Var b);

// Plain-value conveniences for a single distribution.
double entropy_value(const std::vector<double>& alpha);
double kl_value(const std::vector<double>& a, const std::vector<double>& b);

Tensor expected_probs(const ConcentrationMatrix& alpha);

// Larger score means more uncertain.
//   alea:     -max_k alpha_ik / alpha_i0
//   epi_ood:  -alpha_i0
//   epi_misc: -max_k alpha_ik
std::vector<double> uncertainty_scores(const ConcentrationMatrix& alpha,
                                       UncertaintyChannel channel);

}  // namespace dirichlet
}  // namespace gpn
