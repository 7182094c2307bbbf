#pragma once

// Test-only reference computations, written independently of the library
// code paths they check.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Eigenvalues (ascending) and squared first eigenvector components of the
/// symmetric 2x2 matrix [[d1, e], [e, d2]], straight from the characteristic
/// polynomial.
struct TwoByTwo {
  double lambda[2];
  double weight_sq[2];
};

inline TwoByTwo two_by_two(double d1, double d2, double e) {
  const double mean = 0.5 * (d1 + d2);
  const double radius = std::sqrt(0.25 * (d1 - d2) * (d1 - d2) + e * e);
  TwoByTwo out{{mean - radius, mean + radius}, {0.0, 0.0}};
  for (int k = 0; k < 2; ++k) {
    // (d1 - l) v1 + e v2 = 0  =>  v = (e, l - d1) up to scale.
    const double u = out.lambda[k] - d1;
    out.weight_sq[k] = 1.0 / (1.0 + u * u / (e * e));
  }
  return out;
}

/// Dense Q x Q matrix with d_i = a_{i-1}^2 + a_i^2 and s_i = a_i a_{i+1} at
/// distance two, from one-based couplings a[1..Q-1] (a[0] = a[Q] = 0).
inline std::vector<std::vector<double>> dense_from_couplings(const std::vector<double>& values) {
  const std::size_t q = values.size() + 1;
  auto a = [&](std::size_t i) { return (i == 0 || i >= q) ? 0.0 : values[i - 1]; };
  std::vector<std::vector<double>> g(q, std::vector<double>(q, 0.0));
  for (std::size_t i = 1; i <= q; ++i) {
    g[i - 1][i - 1] = a(i - 1) * a(i - 1) + a(i) * a(i);
    if (i + 2 <= q) g[i - 1][i + 1] = g[i + 1][i - 1] = a(i) * a(i + 1);
  }
  return g;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

/// sum_k w_k cos(omega_k t) in long double, plain loop.
inline double cos_sum(const std::vector<double>& omega, const std::vector<double>& weight, double t) {
  long double s = 0.0L;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    s += static_cast<long double>(weight[k]) * std::cos(static_cast<long double>(omega[k]) * t);
  }
  return static_cast<double>(s);
}

}  // namespace oracle
