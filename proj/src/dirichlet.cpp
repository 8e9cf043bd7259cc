#include "gpn/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpn/errors.hpp"

namespace gpn {

namespace {

void require_positive(const Tensor& t, const char* what) {
  for (double v : t.data()) {
    if (!(v > 0.0)) {
      throw ContractViolation(std::string(what) + ": concentration entries must be > 0, got " +
                              std::to_string(v));
    }
  }
}

}  // namespace

ConcentrationMatrix::ConcentrationMatrix(Tensor alpha) : alpha_(std::move(alpha)) {
  require_positive(alpha_, "ConcentrationMatrix");
  alpha0_.assign(alpha_.rows(), 0.0);
  for (std::size_t i = 0; i < alpha_.rows(); ++i) {
    for (std::size_t k = 0; k < alpha_.cols(); ++k) alpha0_[i] += alpha_(i, k);
  }
}

std::size_t ConcentrationMatrix::argmax(std::size_t row) const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < alpha_.cols(); ++k) {
    if (alpha_(row, k) > alpha_(row, best)) best = k;
  }
  return best;
}

std::vector<std::size_t> LabelSet::selected() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

UncertaintyChannel parse_channel(std::string_view name) {
  if (name == "alea") return UncertaintyChannel::kAleatoric;
  if (name == "epi_ood") return UncertaintyChannel::kEpistemicOod;
  if (name == "epi_misc") return UncertaintyChannel::kEpistemicMisc;
  throw ContractViolation("unknown uncertainty channel '" + std::string(name) + "'");
}

namespace dirichlet {

Var uce(Var alpha, const LabelSet& y) {
  const std::size_t n = alpha.rows();
  const std::size_t k = alpha.cols();
  if (y.mask.size() != n || y.labels.size() != n) {
    throw ContractViolation("uce: label set covers " + std::to_string(y.labels.size()) +
                            " nodes, alpha has " + std::to_string(n));
  }
  const std::vector<std::size_t> rows = y.selected();
  Tensor onehot(rows.size(), k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int label = y.labels[rows[r]];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ContractViolation("uce: node " + std::to_string(rows[r]) + " has invalid label " +
                              std::to_string(label));
    }
    onehot(r, static_cast<std::size_t>(label)) = 1.0;
  }
  Tape& tape = alpha.tape();
  if (rows.empty()) return tape.constant(Tensor::scalar(0.0));
  require_positive(alpha.value(), "uce");
  Var a = ops::gather_rows(alpha, rows);
  Var total = ops::sum(ops::digamma(ops::sum_rows(a)));
  Var target = ops::sum(tape.constant(std::move(onehot)) * ops::digamma(a));
  return total - target;
}

Var entropy_rows(Var alpha) {
  require_positive(alpha.value(), "dirichlet entropy");
  const double k = static_cast<double>(alpha.cols());
  Var a0 = ops::sum_rows(alpha);
  Var log_beta = ops::sum_rows(ops::lgamma(alpha)) - ops::lgamma(a0);
  Var strength_term = (a0 - k) * ops::digamma(a0);
  Var component_term = ops::sum_rows((alpha - 1.0) * ops::digamma(alpha));
  return log_beta + strength_term - component_term;
}

Var entropy(Var alpha_row) {
  if (alpha_row.rows() != 1) {
    throw ContractViolation("dirichlet entropy expects a 1xK row, got " + alpha_row.shape().str());
  }
  return entropy_rows(alpha_row);
}

Var kl_rows(Var a, Var b) {
  if (!(a.shape() == b.shape())) {
    throw ContractViolation("kl_dirichlet: shape mismatch " + a.shape().str() + " vs " +
                            b.shape().str());
  }
  require_positive(a.value(), "kl_dirichlet");
  require_positive(b.value(), "kl_dirichlet");
  Var a0 = ops::sum_rows(a);
  Var b0 = ops::sum_rows(b);
  // Grouped as differences so that identical arguments cancel exactly.
  Var norm = (ops::lgamma(a0) - ops::lgamma(b0)) + ops::sum_rows(ops::lgamma(b) - ops::lgamma(a));
  Var cross = ops::sum_rows((a - b) * (ops::digamma(a) - ops::digamma(a0)));
  return norm + cross;
}

Var kl(Var a, Var b) {
  if (a.rows() != 1) {
    throw ContractViolation("kl_dirichlet expects 1xK rows, got " + a.shape().str());
  }
  return kl_rows(a, b);
}

double entropy_value(const std::vector<double>& alpha) {
  Tape tape;
  return entropy(tape.constant(Tensor::row(alpha))).item();
}

double kl_value(const std::vector<double>& a, const std::vector<double>& b) {
  Tape tape;
  return kl(tape.constant(Tensor::row(a)), tape.constant(Tensor::row(b))).item();
}

Tensor expected_probs(const ConcentrationMatrix& alpha) {
  const Tensor& a = alpha.alpha();
  Tensor p(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) p(i, k) = a(i, k) / alpha.alpha0()[i];
  }
  return p;
}

std::vector<double> uncertainty_scores(const ConcentrationMatrix& alpha,
                                       UncertaintyChannel channel) {
  const Tensor& a = alpha.alpha();
  std::vector<double> scores(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double max_alpha = a(i, alpha.argmax(i));
    switch (channel) {
      case UncertaintyChannel::kAleatoric:
        scores[i] = -max_alpha / alpha.alpha0()[i];
        break;
      case UncertaintyChannel::kEpistemicOod:
        scores[i] = -alpha.alpha0()[i];
        break;
      case UncertaintyChannel::kEpistemicMisc:
        scores[i] = -max_alpha;
        break;
      default:
        throw ContractViolation("uncertainty_scores: unknown channel");
    }
  }
  return scores;
}

}  // namespace dirichlet
}  // namespace gpn
