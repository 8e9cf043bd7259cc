#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gpn/tape.hpp"

namespace gpn {

struct GradCheckReport {
  bool passed = true;
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

struct GradCheckOptions {
  double tol = 1e-4;
  double step = 1e-6;
  // Relative error is |a - n| / max(|a|, |n|, abs_floor) so that entries with
  // vanishing gradients are judged on absolute error.
  double abs_floor = 1e-3;
};

struct NamedTensor {
  std::string name;
  Tensor* tensor = nullptr;
};

// Compares reverse-mode gradients against central finite differences for a
// scalar function of one tensor.
GradCheckReport check_gradients(const std::function<Var(Tape&, Var)>& f, const Tensor& point,
                                const GradCheckOptions& opts = {});

// Same, for a loss over several parameter tensors. `build` records the loss on
// a fresh tape, binding the parameters through Tape::param. Parameters must
// have requires_grad set; their gradient buffers are overwritten.
GradCheckReport check_gradients(const std::function<Var(Tape&)>& build,
                                const std::vector<NamedTensor>& params,
                                const GradCheckOptions& opts = {});

}  // namespace gpn
