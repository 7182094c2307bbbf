#pragma once

#include <cstddef>
#include <functional>

namespace collapse {

struct QuadratureOptions {
  /// Target absolute error of the whole integral.
  double abs_tolerance = 1e-10;
  /// Stop once the non-oscillatory factor drops below this at a window start.
  double truncation = 1e-14;
  std::size_t max_windows = 2'000'000;
  int max_depth = 40;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t windows = 0;
  bool extrapolated = false;
};

/// Adaptive Gauss-Kronrod (7/15) on [lo, hi] to an absolute tolerance.
/// Throws NumericalError when the subdivision depth runs out.
[[nodiscard]] QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                                  double abs_tolerance, int max_depth = 40);

/// Integral over [0, inf) of envelope(x)·cos(x·t).
///
/// envelope must be non-oscillatory and, past its maximum, decay
/// monotonically to zero. The range is cut into half periods of cos(x·t)
/// (geometrically growing windows when t = 0), each window is integrated
/// adaptively, and the alternating window sums are accelerated with Wynn's
/// epsilon algorithm. Summation stops when envelope falls below
/// options.truncation at a window start, or earlier when the extrapolated
/// tail has converged.
[[nodiscard]] QuadratureResult integrate_cos_transform(const std::function<double(double)>& envelope, double t,
                                                       const QuadratureOptions& options = {});

}  // namespace collapse
