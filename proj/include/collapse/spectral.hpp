#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "collapse/coupling.hpp"

namespace collapse {

/// Eigenfrequencies and spectral weights of the block that carries the
/// initial state.
///
/// omega_sq is sorted ascending; weights_sq[i] is the squared first component
/// of the i-th orthonormal eigenvector. Within a degenerate cluster only the
/// summed weight is meaningful; the split between members is whatever the
/// solver produced.
struct Spectrum {
  std::vector<double> omega_sq;
  std::vector<double> weights_sq;
  /// Negative eigenvalues absorbed: those in [-tolerance, 0) are set to zero,
  /// larger ones are kept under NegativePolicy::Clamp (zero frequency).
  std::size_t clamped = 0;

  [[nodiscard]] std::size_t size() const { return omega_sq.size(); }
  /// Omega_i = sqrt(max(omega_sq_i, 0)).
  [[nodiscard]] std::vector<double> frequencies() const;
  [[nodiscard]] double weight_sum() const;
};

/// What to do with eigenvalues below -negative_tolerance.
enum class NegativePolicy {
  Reject,  // NumericalError: the matrix should have been positive semi-definite
  Clamp,   // keep them, frequencies() treats them as zero (perturbed matrices)
};

struct EigenOptions {
  double negative_tolerance = 1e-9;
  NegativePolicy negative_policy = NegativePolicy::Reject;
  /// Implicit QL iterations allowed per eigenvalue before falling back to
  /// bisection.
  int max_iterations_per_eigenvalue = 60;
};

/// Implicit-shift QL (Wilkinson shift) on a symmetric tridiagonal block,
/// accumulating only the first row of the rotation product: O(n^2) time,
/// O(n) memory. Falls back to eigen_bisection_first_row if an eigenvalue does
/// not converge within the iteration budget.
[[nodiscard]] Spectrum eigen_tridiagonal_first_row(const TridiagonalBlock& block,
                                                   const EigenOptions& options = {});

/// Sturm-sequence bisection for the eigenvalues of the block and of its
/// trailing (n-1)×(n-1) submatrix; the first-component weights then follow
/// from the interlacing identity
///   w_i^2 = prod_j (lambda_i - mu_j) / prod_{j != i} (lambda_i - lambda_j).
/// O(n^2 log(1/eps)) time. Requires non-zero off-diagonals (simple spectrum).
[[nodiscard]] Spectrum eigen_bisection_first_row(const TridiagonalBlock& block,
                                                 const EigenOptions& options = {});

/// Row-major dense symmetric matrix; only used by the verification oracle.
class DenseMatrix {
 public:
  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  [[nodiscard]] std::size_t size() const { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

[[nodiscard]] DenseMatrix to_dense(const SkipTridiagonalMatrix& matrix);
[[nodiscard]] DenseMatrix to_dense(const TridiagonalBlock& block);

struct DenseDecomposition {
  std::vector<double> eigenvalues;  // ascending
  DenseMatrix eigenvectors;         // column k belongs to eigenvalues[k]
};

constexpr std::size_t kDenseOracleLimit = 256;

/// Cyclic Jacobi rotations on the dense matrix. Independent of the
/// tridiagonal machinery; throws InvalidArgument above kDenseOracleLimit.
[[nodiscard]] DenseDecomposition eigen_dense_oracle(const DenseMatrix& matrix);
[[nodiscard]] DenseDecomposition eigen_dense_oracle(const SkipTridiagonalMatrix& matrix);

/// exp(-Omega^4 / (R^2 N a^4)), the large-eigenvalue weight law.
[[nodiscard]] double weight_large_approx(double omega_sq, const CascadeParams& params);

/// 1 / (1 + (Omega^2/a^2 - 1)^2 / (R^2 N)), the small-eigenvalue weight law.
[[nodiscard]] double weight_small_approx(double omega_sq, const CascadeParams& params);

struct SpacingHistogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

struct SpacingStats {
  double min_gap = 0.0;
  double mean_gap = 0.0;
  bool nondegenerate = true;  // false when min_gap <= 1e-12
  SpacingHistogram histogram;
};

/// Gaps between consecutive frequencies Omega_i (not Omega_i^2).
[[nodiscard]] SpacingStats spacing_stats(const Spectrum& spectrum, std::size_t bins = 50);

}  // namespace collapse
