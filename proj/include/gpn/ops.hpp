#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gpn/sparse.hpp"
#include "gpn/tape.hpp"

// Differentiable primitives over Var. Binary elementwise ops broadcast along
// any dimension of size 1 (scalars, row vectors, column vectors); any other
// mismatch raises ContractViolation naming both shapes.
namespace gpn::ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);

Var matmul(Var a, Var b);
Var transpose(Var a);

Var sum(Var a);       // -> 1x1
Var mean(Var a);      // -> 1x1
Var sum_rows(Var a);  // row-wise sum -> Nx1
Var sum_cols(Var a);  // column-wise sum -> 1xC
Var max_rows(Var a);  // row-wise max -> Nx1; gradient to the first maximiser

Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var sqrt(Var a);
Var row_norm(Var a);  // Euclidean norm of each row -> Nx1; gradient 0 at the origin

Var digamma(Var a);
Var lgamma(Var a);
Var softplus(Var a);
Var sigmoid(Var a);

Var relu(Var a);        // d/dx at 0 is 0
Var log_sigmoid(Var a);
Var gelu(Var a);        // exact x * Phi(x)
Var hard_tanh(Var a);   // d/dx at +-1 is 0

// Elementwise clamp; gradient passes only where lo <= x <= hi.
Var clamp(Var a, double lo, double hi);

Var gather_rows(Var a, std::span<const std::size_t> rows);
Var concat_cols(std::span<const Var> parts);

// Sparse constant times dense variable. `m` is referenced by the backward pass
// and must outlive it.
Var spmm(const CsrMatrix& m, Var b);

// Elementwise op from a value function and its derivative f'(x).
Var map_elementwise(Var a, const std::function<double(double)>& f,
                    const std::function<double(double)>& df);

}  // namespace gpn::ops

namespace gpn {

inline Var operator+(Var a, Var b) { return ops::add(a, b); }
inline Var operator-(Var a, Var b) { return ops::sub(a, b); }
inline Var operator*(Var a, Var b) { return ops::mul(a, b); }
inline Var operator/(Var a, Var b) { return ops::div(a, b); }
inline Var operator-(Var a) { return ops::neg(a); }
inline Var operator*(Var a, double c) { return ops::scale(a, c); }
inline Var operator*(double c, Var a) { return ops::scale(a, c); }
inline Var operator+(Var a, double c) { return ops::add_scalar(a, c); }
inline Var operator+(double c, Var a) { return ops::add_scalar(a, c); }
inline Var operator-(Var a, double c) { return ops::add_scalar(a, -c); }
inline Var operator-(double c, Var a) { return ops::add_scalar(ops::neg(a), c); }

}  // namespace gpn
