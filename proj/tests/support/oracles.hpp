#pragma once

// Reference computations used only by tests. Each one follows a different
// route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle {

// psi(x) = -gamma + sum_{n>=0} (1/(n+1) - 1/(n+x)), first N terms summed
// directly and the tail by Euler-Maclaurin around n = N.
inline long double digamma_series(long double x) {
  constexpr long double euler_gamma = 0.577215664901532860606512090082402431L;
  constexpr int kTerms = 2000;
  long double s = -euler_gamma;
  for (int n = 0; n < kTerms; ++n) s += 1.0L / (n + 1.0L) - 1.0L / (n + x);
  // Tail f(n) = 1/(n+1) - 1/(n+x) for n >= N:
  //   int_N^inf f + f(N)/2 - f'(N)/12 + f'''(N)/720
  const long double a = kTerms + 1.0L;
  const long double b = kTerms + x;
  const long double integral = std::log(b / a);
  const long double f = 1.0L / a - 1.0L / b;
  const long double f1 = -1.0L / (a * a) + 1.0L / (b * b);
  const long double f3 = -6.0L / (a * a * a * a) + 6.0L / (b * b * b * b);
  return s + integral + f / 2 - f1 / 12 + f3 / 720;
}

// psi'(x) = sum_{n>=0} 1/(n+x)^2, same tail treatment.
inline long double trigamma_series(long double x) {
  constexpr int kTerms = 2000;
  long double s = 0.0L;
  for (int n = 0; n < kTerms; ++n) s += 1.0L / ((n + x) * (n + x));
  const long double b = kTerms + x;
  const long double f = 1.0L / (b * b);
  const long double f1 = -2.0L / (b * b * b);
  const long double f3 = -24.0L / (b * b * b * b * b);
  return s + 1.0L / b + f / 2 - f1 / 12 + f3 / 720;
}

// Gaussian elimination with partial pivoting; A is n x n row-major, B is n x m.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                                       std::size_t m) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
    for (std::size_t c = 0; c < m; ++c) std::swap(b[col * m + c], b[piv * m + c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      for (std::size_t c = 0; c < m; ++c) b[r * m + c] -= f * b[col * m + c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) b[r * m + c] /= a[r * n + r];
  }
  return b;
}

// Exhaustive pairwise AUROC: every (positive, negative) pair scores 2 when
// the positive is higher, 1 on a tie.
inline double pairwise_auroc(const std::vector<double>& s, const std::vector<bool>& pos) {
  unsigned long long half = 0;
  unsigned long long p = 0;
  unsigned long long n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) (pos[i] ? p : n) += 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (pos[j]) continue;
      if (s[i] > s[j]) half += 2;
      else if (s[i] == s[j]) half += 1;
    }
  }
  return static_cast<double>(half) / (2.0 * static_cast<double>(p * n));
}

// Average precision by enumerating ranks: the item at rank r is the one with
// exactly r-1 items ahead of it (higher score, or equal score and earlier).
inline double enumerated_aupr(const std::vector<double>& s, const std::vector<bool>& pos) {
  const std::size_t m = s.size();
  std::size_t total_pos = 0;
  for (bool b : pos) total_pos += b ? 1 : 0;
  std::vector<std::size_t> item_at(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++ahead;
    }
    item_at[ahead] = i;
  }
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < m; ++r) {
    if (!pos[item_at[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(total_pos);
}

// Expected average precision of a uniformly random ranking with P positives
// among M items: (H_M + (P-1)/(M-1) (M - H_M)) / M.
inline double random_ranking_ap(std::size_t positives, std::size_t total) {
  double harmonic = 0.0;
  for (std::size_t r = 1; r <= total; ++r) harmonic += 1.0 / static_cast<double>(r);
  const double p = static_cast<double>(positives);
  const double m = static_cast<double>(total);
  return (harmonic + (p - 1.0) / (m - 1.0) * (m - harmonic)) / m;
}

inline double dirichlet_log_pdf(const std::vector<double>& alpha, const std::vector<double>& x) {
  double a0 = 0.0;
  double lp = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    a0 += alpha[k];
    lp += (alpha[k] - 1.0) * std::log(x[k]) - std::lgamma(alpha[k]);
  }
  return lp + std::lgamma(a0);
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of E_{x ~ Dir(a)}[g(x)] via normalised gamma draws.
template <class G>
McEstimate dirichlet_expectation(const std::vector<double>& a, std::size_t samples,
                                 std::mt19937_64& rng, G g) {
  std::vector<std::gamma_distribution<double>> gammas;
  for (double ak : a) gammas.emplace_back(ak, 1.0);
  std::vector<double> x(a.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      x[k] = gammas[k](rng);
      total += x[k];
    }
    for (double& v : x) v /= total;
    const double val = g(x);
    sum += val;
    sum_sq += val * val;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

inline McEstimate mc_entropy(const std::vector<double>& a, std::size_t samples,
                             std::mt19937_64& rng) {
  return dirichlet_expectation(a, samples, rng,
                               [&](const std::vector<double>& x) { return -dirichlet_log_pdf(a, x); });
}

inline McEstimate mc_kl(const std::vector<double>& a, const std::vector<double>& b,
                        std::size_t samples, std::mt19937_64& rng) {
  return dirichlet_expectation(a, samples, rng, [&](const std::vector<double>& x) {
    return dirichlet_log_pdf(a, x) - dirichlet_log_pdf(b, x);
  });
}

// log|det J| of a map R^L -> R^L at z by central differences and LU.
template <class Map>
double fd_log_abs_det(Map f, const std::vector<double>& z, double h = 1e-6) {
  const std::size_t n = z.size();
  std::vector<double> jac(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    auto up = z;
    auto down = z;
    up[j] += h;
    down[j] -= h;
    const auto fu = f(up);
    const auto fd = f(down);
    for (std::size_t i = 0; i < n; ++i) jac[i * n + j] = (fu[i] - fd[i]) / (2 * h);
  }
  double logdet = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(jac[r * n + col]) > std::abs(jac[piv * n + col])) piv = r;
    }
    for (std::size_t c = 0; c < n; ++c) std::swap(jac[col * n + c], jac[piv * n + c]);
    logdet += std::log(std::abs(jac[col * n + col]));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double fct = jac[r * n + col] / jac[col * n + col];
      for (std::size_t c = col; c < n; ++c) jac[r * n + c] -= fct * jac[col * n + c];
    }
  }
  return logdet;
}

}  // namespace oracle
