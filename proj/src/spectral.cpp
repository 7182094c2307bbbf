#include "collapse/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "collapse/compensated.hpp"
#include "collapse/error.hpp"

namespace collapse {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void validate_block(const TridiagonalBlock& block) {
  const std::size_t n = block.size();
  if (n == 0) throw InvalidArgument("tridiagonal block is empty");
  if (block.off.size() != n - 1) {
    throw InvalidArgument("tridiagonal block needs n-1 off-diagonal entries");
  }
  for (double v : block.diag) {
    if (!std::isfinite(v)) throw InvalidArgument("tridiagonal block has a non-finite diagonal entry");
  }
  for (double v : block.off) {
    if (!std::isfinite(v)) throw InvalidArgument("tridiagonal block has a non-finite off-diagonal entry");
  }
}

// Sorts eigenpairs ascending and applies the negative-eigenvalue policy.
Spectrum finish(std::vector<double> values, std::vector<double> weights, const EigenOptions& options) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  Spectrum out;
  out.omega_sq.reserve(values.size());
  out.weights_sq.reserve(values.size());
  for (std::size_t k : order) {
    double v = values[k];
    if (v < 0.0) {
      if (v >= -options.negative_tolerance) {
        v = 0.0;
        ++out.clamped;
      } else if (options.negative_policy == NegativePolicy::Clamp) {
        ++out.clamped;
      } else {
        throw NumericalError("eigenvalue " + std::to_string(out.omega_sq.size()) + " = " +
                             std::to_string(v) + " is below the semi-definiteness tolerance");
      }
    }
    out.omega_sq.push_back(v);
    out.weights_sq.push_back(weights[k]);
  }
  return out;
}

// Number of eigenvalues of the tridiagonal matrix strictly below x.
std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double coupling = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    q = diag[i] - x - (i == 0 ? 0.0 : coupling / q);
    if (q == 0.0) q = -kEps * (std::fabs(diag[i]) + std::fabs(x) + kEps);
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> bisect_all(std::span<const double> diag, std::span<const double> off) {
  const std::size_t n = diag.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::fabs(off[i - 1]);
    if (i + 1 < n) r += std::fabs(off[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double scale = std::max({std::fabs(lo), std::fabs(hi), 1.0});
  lo -= kEps * scale;
  hi += kEps * scale;

  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) {
    double a = lo;
    double b = hi;
    // Invariant: count(a) <= k < count(b).
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (b - a <= 2.0 * kEps * std::max(std::fabs(a), std::fabs(b))) break;
      if (sturm_count(diag, off, mid) > k) {
        b = mid;
      } else {
        a = mid;
      }
    }
    values[k] = 0.5 * (a + b);
  }
  return values;
}

// Weights of an unreduced block (all off-diagonals non-zero) from the
// eigenvalues of the block and of its trailing submatrix.
std::vector<double> interlacing_weights(const std::vector<double>& lambda, const std::vector<double>& mu) {
  const std::size_t n = lambda.size();
  std::vector<double> w(n, 1.0);
  if (n == 1) return w;
  for (std::size_t i = 0; i < n; ++i) {
    double log_w = 0.0;
    for (double m : mu) log_w += std::log(std::fabs(lambda[i] - m));
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) log_w -= std::log(std::fabs(lambda[i] - lambda[j]));
    }
    w[i] = std::exp(log_w);
  }
  return w;
}

}  // namespace

std::vector<double> Spectrum::frequencies() const {
  std::vector<double> out;
  out.reserve(omega_sq.size());
  for (double v : omega_sq) out.push_back(std::sqrt(std::max(v, 0.0)));
  return out;
}

double Spectrum::weight_sum() const {
  CompensatedSum sum;
  for (double w : weights_sq) sum += w;
  return sum.value();
}

Spectrum eigen_bisection_first_row(const TridiagonalBlock& block, const EigenOptions& options) {
  validate_block(block);
  const std::size_t n = block.size();
  std::span<const double> diag(block.diag);
  std::span<const double> off(block.off);

  // Rows past the first zero coupling never see the initial state.
  std::size_t lead = n;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (off[i] == 0.0) {
      lead = i + 1;
      break;
    }
  }

  std::vector<double> values = bisect_all(diag.first(lead), off.first(lead - 1));
  std::vector<double> mu;
  if (lead > 1) mu = bisect_all(diag.subspan(1, lead - 1), off.subspan(1, lead - 2));
  std::vector<double> weights = interlacing_weights(values, mu);

  if (lead < n) {
    const std::vector<double> rest = bisect_all(diag.subspan(lead), off.subspan(lead));
    values.insert(values.end(), rest.begin(), rest.end());
    weights.resize(values.size(), 0.0);
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw NumericalError("bisection weights are not finite (clustered spectrum)");
  }
  return finish(std::move(values), std::move(weights), options);
}

Spectrum eigen_tridiagonal_first_row(const TridiagonalBlock& block, const EigenOptions& options) {
  validate_block(block);
  const std::size_t n = block.size();
  std::vector<double> d = block.diag;
  std::vector<double> e(n, 0.0);
  std::copy(block.off.begin(), block.off.end(), e.begin());
  // First row of the accumulated rotation product, starting from identity.
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;

  for (std::size_t l = 0; l < n; ++l) {
    int iterations = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= kEps * dd) break;
      }
      if (m == l) break;
      if (iterations++ == options.max_iterations_per_eigenvalue) {
        return eigen_bisection_first_row(block, options);
      }
      // Wilkinson shift from the leading 2x2 of the unreduced segment.
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool deflated = false;
      for (std::size_t i = m; i-- > l;) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        const double zf = z[i + 1];
        z[i + 1] = s * z[i] + c * zf;
        z[i] = c * z[i] - s * zf;
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }

  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = z[i] * z[i];
  return finish(std::move(d), std::move(weights), options);
}

DenseMatrix to_dense(const SkipTridiagonalMatrix& matrix) {
  const std::size_t n = matrix.dimension();
  DenseMatrix out(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out(r, c) = matrix.at(r, c);
  }
  return out;
}

DenseMatrix to_dense(const TridiagonalBlock& block) {
  validate_block(block);
  const std::size_t n = block.size();
  DenseMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = block.diag[i];
    if (i + 1 < n) {
      out(i, i + 1) = block.off[i];
      out(i + 1, i) = block.off[i];
    }
  }
  return out;
}

DenseDecomposition eigen_dense_oracle(const DenseMatrix& matrix) {
  const std::size_t n = matrix.size();
  if (n == 0) throw InvalidArgument("dense oracle needs a non-empty matrix");
  if (n > kDenseOracleLimit) {
    throw InvalidArgument("dense oracle is limited to dimension " + std::to_string(kDenseOracleLimit));
  }
  DenseMatrix a = matrix;
  DenseMatrix v(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) total += a(p, q) * a(p, q);
  total = std::sqrt(total);

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_norm() <= kEps * total) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw NumericalError("Jacobi oracle did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return a(l, l) < a(r, r); });
  DenseDecomposition out{{}, DenseMatrix(n)};
  out.eigenvalues.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues.push_back(a(order[k], order[k]));
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
  }
  return out;
}

DenseDecomposition eigen_dense_oracle(const SkipTridiagonalMatrix& matrix) {
  if (matrix.dimension() > kDenseOracleLimit) {
    throw InvalidArgument("dense oracle is limited to dimension " + std::to_string(kDenseOracleLimit));
  }
  return eigen_dense_oracle(to_dense(matrix));
}

double weight_large_approx(double omega_sq, const CascadeParams& params) {
  const double a2 = params.a * params.a;
  return std::exp(-(omega_sq * omega_sq) / (params.R * params.R * params.N * a2 * a2));
}

double weight_small_approx(double omega_sq, const CascadeParams& params) {
  const double detuning = omega_sq / (params.a * params.a) - 1.0;
  return 1.0 / (1.0 + detuning * detuning / (params.R * params.R * params.N));
}

SpacingStats spacing_stats(const Spectrum& spectrum, std::size_t bins) {
  if (spectrum.size() < 2) throw InvalidArgument("spacing statistics need at least two eigenvalues");
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  if (!std::is_sorted(spectrum.omega_sq.begin(), spectrum.omega_sq.end())) {
    throw InvalidArgument("spectrum must be sorted ascending");
  }
  const std::vector<double> omega = spectrum.frequencies();
  std::vector<double> gaps(omega.size() - 1);
  for (std::size_t i = 0; i + 1 < omega.size(); ++i) gaps[i] = omega[i + 1] - omega[i];

  SpacingStats stats;
  stats.min_gap = *std::min_element(gaps.begin(), gaps.end());
  CompensatedSum sum;
  for (double g : gaps) sum += g;
  stats.mean_gap = sum.value() / static_cast<double>(gaps.size());
  stats.nondegenerate = stats.min_gap > 1e-12;

  const double top = *std::max_element(gaps.begin(), gaps.end());
  const double width = top > 0.0 ? top / static_cast<double>(bins) : 1.0;
  stats.histogram.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) stats.histogram.edges[b] = width * static_cast<double>(b);
  stats.histogram.counts.assign(bins, 0);
  for (double g : gaps) {
    auto b = static_cast<std::size_t>(g / width);
    stats.histogram.counts[std::min(b, bins - 1)] += 1;
  }
  return stats;
}

}  // namespace collapse
