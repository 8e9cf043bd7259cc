#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "gpn/tensor.hpp"

namespace gpn {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double item() const { return value().item(); }
  bool needs_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run record of primitive operations. Nodes are appended in
// evaluation order, so every node follows its inputs and a reverse sweep is a
// valid topological order. A tape is built for one forward pass and discarded.
class Tape {
 public:
  // Called during the reverse sweep with the id of the node being processed.
  // Implementations read grad(self) and accumulate into accumulate_grad(input).
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A value that never receives a gradient.
  Var constant(Tensor value);

  // A leaf bound to an external tensor. When the tensor requires grad,
  // backward() accumulates d(loss)/d(leaf) into leaf.grad(). The tensor must
  // outlive every backward() call on this tape.
  Var param(Tensor& leaf);

  // Appends an op result. The node needs grad iff any input does; when none
  // does, `fn` is dropped.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

  // Reverse sweep from a scalar loss. Interior gradients are reset on every
  // call; leaf gradients accumulate across calls until zero_grad().
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  std::span<double> accumulate_grad(std::size_t id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool needs_grad = false;
    Tensor* leaf = nullptr;
    std::vector<double> grad;
  };

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::needs_grad() const { return tape_->needs_grad(id_); }

}  // namespace gpn
