#include "gpn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpn/errors.hpp"
#include "gpn/special.hpp"

namespace gpn {

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) out[r * cols + col_idx[p]] = values[p];
  }
  return out;
}

namespace ops {

namespace {

void require_same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ContractViolation("operands recorded on different tapes");
}

std::size_t broadcast_dim(std::size_t a, std::size_t b, const Shape& sa, const Shape& sb,
                          const char* op) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  throw ContractViolation(std::string(op) + ": incompatible shapes " + sa.str() + " and " +
                          sb.str());
}

// Index into an operand that may be broadcast along either axis.
struct Broadcast {
  Shape src;
  std::size_t at(std::size_t r, std::size_t c) const {
    return (src.rows == 1 ? 0 : r) * src.cols + (src.cols == 1 ? 0 : c);
  }
};

template <class Fwd, class DA, class DB>
Var binary(Var a, Var b, const char* name, Fwd fwd, DA da, DB db) {
  require_same_tape(a, b);
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  const Shape out{broadcast_dim(sa.rows, sb.rows, sa, sb, name),
                  broadcast_dim(sa.cols, sb.cols, sa, sb, name)};
  const Broadcast ba{sa};
  const Broadcast bb{sb};
  const Tensor& va = a.value();
  const Tensor& vb = b.value();
  Tensor result(out.rows, out.cols);
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c) {
      result(r, c) = fwd(va[ba.at(r, c)], vb[bb.at(r, c)]);
    }
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape().record(std::move(result), {ia, ib}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const Tensor& xa = t.value(ia);
    const Tensor& xb = t.value(ib);
    const bool need_a = t.needs_grad(ia);
    const bool need_b = t.needs_grad(ib);
    std::span<double> ga = need_a ? t.accumulate_grad(ia) : std::span<double>{};
    std::span<double> gb = need_b ? t.accumulate_grad(ib) : std::span<double>{};
    for (std::size_t r = 0; r < out.rows; ++r) {
      for (std::size_t c = 0; c < out.cols; ++c) {
        const std::size_t ka = ba.at(r, c);
        const std::size_t kb = bb.at(r, c);
        const double go = g[r * out.cols + c];
        if (need_a) ga[ka] += go * da(xa[ka], xb[kb]);
        if (need_b) gb[kb] += go * db(xa[ka], xb[kb]);
      }
    }
  });
}

// Elementwise op whose derivative is expressed through input x and output y.
template <class Fwd, class Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const Tensor& va = a.value();
  Tensor result(va.rows(), va.cols());
  for (std::size_t i = 0; i < va.size(); ++i) result[i] = fwd(va[i]);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(result), {ia}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    auto gi = t.accumulate_grad(ia);
    for (std::size_t i = 0; i < x.size(); ++i) gi[i] += g[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var div(Var a, Var b) {
  return binary(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

Var neg(Var a) {
  return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var scale(Var a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& va = a.value();
  const Tensor& vb = b.value();
  if (va.cols() != vb.rows()) {
    throw ContractViolation("matmul: incompatible shapes " + va.shape().str() + " and " +
                            vb.shape().str());
  }
  const std::size_t n = va.rows();
  const std::size_t k = va.cols();
  const std::size_t m = vb.cols();
  Tensor result(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = va(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) result(i, j) += aip * vb(p, j);
    }
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape().record(std::move(result), {ia, ib}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const Tensor& xa = t.value(ia);
    const Tensor& xb = t.value(ib);
    if (t.needs_grad(ia)) {
      // dA = G * B^T
      auto ga = t.accumulate_grad(ia);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * xb(p, j);
          ga[i * k + p] += acc;
        }
      }
    }
    if (t.needs_grad(ib)) {
      // dB = A^T * G
      auto gb = t.accumulate_grad(ib);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = xa(i, p);
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < m; ++j) gb[p * m + j] += aip * g[i * m + j];
        }
      }
    }
  });
}

Var transpose(Var a) {
  const Tensor& va = a.value();
  const std::size_t r = va.rows();
  const std::size_t c = va.cols();
  Tensor result(c, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) result(j, i) = va(i, j);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(result), {ia}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gi = t.accumulate_grad(ia);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) gi[i * c + j] += g[j * r + i];
    }
  });
}

Var sum(Var a) {
  const Tensor& va = a.value();
  double s = 0.0;
  for (double v : va.data()) s += v;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor::scalar(s), {ia}, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& gi : t.accumulate_grad(ia)) gi += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ContractViolation("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var sum_rows(Var a) {
  const Tensor& va = a.value();
  const std::size_t r = va.rows();
  const std::size_t c = va.cols();
  Tensor result(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += va(i, j);
    result[i] = s;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(result), {ia}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gi = t.accumulate_grad(ia);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) gi[i * c + j] += g[i];
    }
  });
}

Var sum_cols(Var a) {
  const Tensor& va = a.value();
  const std::size_t r = va.rows();
  const std::size_t c = va.cols();
  Tensor result(1, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) result[j] += va(i, j);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(result), {ia}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gi = t.accumulate_grad(ia);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) gi[i * c + j] += g[j];
    }
  });
}

Var max_rows(Var a) {
  const Tensor& va = a.value();
  const std::size_t r = va.rows();
  const std::size_t c = va.cols();
  if (c == 0) throw ContractViolation("max_rows on tensor with zero columns");
  Tensor result(r, 1);
  std::vector<std::size_t> argmax(r, 0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 1; j < c; ++j) {
      if (va(i, j) > va(i, argmax[i])) argmax[i] = j;
    }
    result[i] = va(i, argmax[i]);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(result), {ia},
                         [=, argmax = std::move(argmax)](Tape& t, std::size_t self) {
                           const auto g = t.grad(self);
                           auto gi = t.accumulate_grad(ia);
                           for (std::size_t i = 0; i < r; ++i) gi[i * c + argmax[i]] += g[i];
                         });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sqrt(Var a) {
  return unary(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Var row_norm(Var a) {
  const Tensor& va = a.value();
  const std::size_t r = va.rows();
  const std::size_t c = va.cols();
  Tensor result(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += va(i, j) * va(i, j);
    result[i] = std::sqrt(s);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(result), {ia}, [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    auto gi = t.accumulate_grad(ia);
    for (std::size_t i = 0; i < r; ++i) {
      if (y[i] == 0.0) continue;
      const double s = g[i] / y[i];
      for (std::size_t j = 0; j < c; ++j) gi[i * c + j] += s * x(i, j);
    }
  });
}

Var digamma(Var a) {
  return unary(
      a, [](double x) { return special::digamma(x); },
      [](double x, double) { return special::trigamma(x); });
}

Var lgamma(Var a) {
  return unary(
      a, [](double x) { return special::log_gamma(x); },
      [](double x, double) { return special::digamma(x); });
}

Var softplus(Var a) {
  return unary(
      a, [](double x) { return special::softplus(x); },
      [](double x, double) { return special::sigmoid(x); });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return special::sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var log_sigmoid(Var a) {
  return unary(
      a, [](double x) { return special::log_sigmoid(x); },
      [](double x, double) { return special::sigmoid(-x); });
}

Var gelu(Var a) {
  return unary(
      a, [](double x) { return x * special::normal_cdf(x); },
      [](double x, double) { return special::normal_cdf(x) + x * special::normal_pdf(x); });
}

Var hard_tanh(Var a) {
  return unary(
      a, [](double x) { return std::clamp(x, -1.0, 1.0); },
      [](double x, double) { return (x > -1.0 && x < 1.0) ? 1.0 : 0.0; });
}

Var clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw ContractViolation("clamp: lo must not exceed hi");
  return unary(
      a, [=](double x) { return std::clamp(x, lo, hi); },
      [=](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& va = a.value();
  const std::size_t c = va.cols();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  Tensor result(idx.size(), c);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= va.rows()) {
      throw ContractViolation("gather_rows: row " + std::to_string(idx[i]) +
                              " out of range for shape " + va.shape().str());
    }
    for (std::size_t j = 0; j < c; ++j) result(i, j) = va(idx[i], j);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(result), {ia},
                         [=, idx = std::move(idx)](Tape& t, std::size_t self) {
                           const auto g = t.grad(self);
                           auto gi = t.accumulate_grad(ia);
                           for (std::size_t i = 0; i < idx.size(); ++i) {
                             for (std::size_t j = 0; j < c; ++j) gi[idx[i] * c + j] += g[i * c + j];
                           }
                         });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no inputs");
  const std::size_t r = parts.front().rows();
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_same_tape(parts.front(), p);
    if (p.rows() != r) {
      throw ContractViolation("concat_cols: incompatible shapes " + parts.front().shape().str() +
                              " and " + p.shape().str());
    }
    ids.push_back(p.id());
    offsets.push_back(total);
    total += p.cols();
  }
  Tensor result(r, total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < v.cols(); ++j) result(i, offsets[k] + j) = v(i, j);
    }
  }
  return parts.front().tape().record(
      std::move(result), ids, [=](Tape& t, std::size_t self) {
        const auto g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.needs_grad(ids[k])) continue;
          const std::size_t c = t.value(ids[k]).cols();
          auto gk = t.accumulate_grad(ids[k]);
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) gk[i * c + j] += g[i * total + offsets[k] + j];
          }
        }
      });
}

Var spmm(const CsrMatrix& m, Var b) {
  const Tensor& vb = b.value();
  if (m.cols != vb.rows()) {
    throw ContractViolation("spmm: incompatible shapes [" + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + "] and " + vb.shape().str());
  }
  const std::size_t c = vb.cols();
  Tensor result(m.rows, c);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) {
      const double w = m.values[p];
      const std::size_t j = m.col_idx[p];
      for (std::size_t k = 0; k < c; ++k) result(i, k) += w * vb(j, k);
    }
  }
  const std::size_t ib = b.id();
  const CsrMatrix* mp = &m;
  return b.tape().record(std::move(result), {ib}, [=](Tape& t, std::size_t self) {
    // dB = M^T G, scattered row by row.
    const auto g = t.grad(self);
    auto gb = t.accumulate_grad(ib);
    for (std::size_t i = 0; i < mp->rows; ++i) {
      for (std::size_t p = mp->row_ptr[i]; p < mp->row_ptr[i + 1]; ++p) {
        const double w = mp->values[p];
        const std::size_t j = mp->col_idx[p];
        for (std::size_t k = 0; k < c; ++k) gb[j * c + k] += w * g[i * c + k];
      }
    }
  });
}

Var map_elementwise(Var a, const std::function<double(double)>& f,
                    const std::function<double(double)>& df) {
  return unary(a, f, [df](double x, double) { return df(x); });
}

}  // namespace ops
}  // namespace gpn
