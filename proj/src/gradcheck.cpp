#include "gpn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpn/errors.hpp"

namespace gpn {

namespace {

double evaluate(const std::function<Var(Tape&)>& build) {
  Tape tape;
  return build(tape).item();
}

void compare(GradCheckReport& report, const std::string& name, std::size_t index, double analytic,
             double numeric, const GradCheckOptions& opts) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), opts.abs_floor});
  double err = std::abs(analytic - numeric) / denom;
  if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
  ++report.entries_checked;
  if (report.entries_checked == 1 || err > report.max_rel_error) {
    report.max_rel_error = err;
    report.worst_tensor = name;
    report.worst_index = index;
    report.analytic = analytic;
    report.numeric = numeric;
  }
}

}  // namespace

GradCheckReport check_gradients(const std::function<Var(Tape&)>& build,
                                const std::vector<NamedTensor>& params,
                                const GradCheckOptions& opts) {
  for (const auto& p : params) {
    if (p.tensor == nullptr || !p.tensor->requires_grad()) {
      throw ContractViolation("check_gradients: parameter '" + p.name + "' does not require grad");
    }
    p.tensor->zero_grad();
  }
  {
    Tape tape;
    Var loss = build(tape);
    tape.backward(loss);
  }

  GradCheckReport report;
  for (const auto& p : params) {
    Tensor& t = *p.tensor;
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + opts.step;
      const double up = evaluate(build);
      t[i] = saved - opts.step;
      const double down = evaluate(build);
      t[i] = saved;
      compare(report, p.name, i, analytic[i], (up - down) / (2.0 * opts.step), opts);
    }
  }
  report.passed = report.max_rel_error <= opts.tol;
  return report;
}

GradCheckReport check_gradients(const std::function<Var(Tape&, Var)>& f, const Tensor& point,
                                const GradCheckOptions& opts) {
  Tensor x(point.shape(), point.values());
  x.set_requires_grad(true);
  return check_gradients([&](Tape& tape) { return f(tape, tape.param(x)); },
                         {NamedTensor{"x", &x}}, opts);
}

}  // namespace gpn
