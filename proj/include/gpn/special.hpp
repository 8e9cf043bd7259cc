#pragma once

// Scalar special functions used by the Dirichlet calculus and activations.

namespace gpn::special {

// Psi(x) for x > 0: upward recurrence until x > 6, then the asymptotic series.
double digamma(double x);

// Psi'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

double log_gamma(double x);

// log(1 + exp(x)) without overflow.
double softplus(double x);
double softplus_inverse(double y);

double sigmoid(double x);

// log(sigmoid(x)) = -softplus(-x).
double log_sigmoid(double x);

// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace gpn::special
