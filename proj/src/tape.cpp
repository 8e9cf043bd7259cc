#include "gpn/tape.hpp"

#include <algorithm>

#include "gpn/errors.hpp"

namespace gpn {

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Tensor& leaf) {
  Tensor copy(leaf.shape(), leaf.values());
  const bool grad = leaf.requires_grad();
  nodes_.push_back(Node{std::move(copy), {}, nullptr, grad, grad ? &leaf : nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
  bool grad = false;
  for (std::size_t in : inputs) {
    if (in >= nodes_.size()) throw ContractViolation("tape input refers to a future node");
    grad = grad || nodes_[in].needs_grad;
  }
  if (!grad) fn = nullptr;
  nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(fn), grad, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

std::span<double> Tape::accumulate_grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw ContractViolation("backward: loss was recorded on another tape");
  if (value(loss.id()).size() != 1) {
    throw ContractViolation("backward: loss must be scalar, got shape " +
                            value(loss.id()).shape().str());
  }
  for (std::size_t i = 0; i <= loss.id(); ++i) nodes_[i].grad.clear();
  if (!nodes_[loss.id()].needs_grad) return;

  accumulate_grad(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.leaf != nullptr) {
      auto dst = n.leaf->grad();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
    }
    if (n.backward) n.backward(*this, i);
  }
}

}  // namespace gpn
