#include "gpn/special.hpp"

#include <cmath>
#include <numbers>

namespace gpn::special {

namespace {
constexpr double kAsymptoticStart = 6.0;
}  // namespace

double digamma(double x) {
  if (std::isnan(x)) return x;
  double shift = 0.0;
  while (x <= kAsymptoticStart) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // Bernoulli terms B_2n / (2n x^2n), n = 1..7, plus the log and 1/(2x) terms.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
      inv2 * (1.0 / 120 -
      inv2 * (1.0 / 252 -
      inv2 * (1.0 / 240 -
      inv2 * (1.0 / 132 -
      inv2 * (691.0 / 32760 -
      inv2 * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  if (std::isnan(x)) return x;
  double shift = 0.0;
  while (x <= kAsymptoticStart) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  // 1/x + 1/(2x^2) + sum_n B_2n / x^(2n+1), n = 1..7.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * inv2 * (1.0 / 6 -
      inv2 * (1.0 / 30 -
      inv2 * (1.0 / 42 -
      inv2 * (1.0 / 30 -
      inv2 * (5.0 / 66 -
      inv2 * (691.0 / 2730 -
      inv2 * (7.0 / 6)))))));
  return shift + inv + 0.5 * inv2 + series;
}

double log_gamma(double x) { return std::lgamma(x); }

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  // log(exp(y) - 1), stable for large y.
  if (y > 30.0) return y + std::log1p(-std::exp(-y));
  return std::log(std::expm1(y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) { return -softplus(-x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace gpn::special
