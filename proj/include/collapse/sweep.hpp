#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "collapse/asymptotics.hpp"
#include "collapse/coupling.hpp"
#include "collapse/dynamics.hpp"

namespace collapse {

struct SweepGrid {
  std::vector<double> R;
  std::vector<double> N;
  std::vector<double> a;
  std::vector<std::size_t> Q;
  ProfileKind kind = ProfileKind::Uniform;

  friend bool operator==(const SweepGrid&, const SweepGrid&) = default;
};

/// Where each cell fits its envelopes. Unset bounds fall back to: Gaussian
/// from the grid start to the first zero crossing of alpha_1, exponential
/// from that crossing to the grid end.
struct SweepFitWindows {
  std::optional<FitWindow> short_time;
  std::optional<FitWindow> long_time;

  friend bool operator==(const SweepFitWindows&, const SweepFitWindows&) = default;
};

struct SweepOptions {
  TimeGrid grid{};
  SweepFitWindows windows{};
  unsigned threads = 1;
};

struct ScalingRow {
  CascadeParams params;
  std::size_t Q = 0;
  double predicted_st_rate = 0.0;       // 0.168995 R sqrt(N) a^2
  double predicted_lt_rate = 0.0;       // a sqrt(R sqrt(N)) / sqrt(2)
  double predicted_lt_rate_coarse = 0.0;  // a sqrt(R sqrt(N))
  std::optional<EnvelopeFit> st_fit;
  std::optional<EnvelopeFit> lt_fit;
  /// First failure of the cell (profile rejected, fit impossible, ...).
  std::optional<std::string> error;
};

struct RegressionSummary {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

struct SweepResult {
  std::vector<ScalingRow> rows;  // cell order: R outermost, then N, a, Q
  /// Fitted short-time rate regressed on R sqrt(N) a^2 (cells with a fit).
  std::optional<RegressionSummary> st_regression;
  /// Fitted long-time rate regressed on a sqrt(R sqrt(N)) / sqrt(2).
  std::optional<RegressionSummary> lt_regression;
};

/// Runs every (R, N, a, Q) cell: profile, odd block spectrum, spectral trace,
/// envelope fits. Cell failures are recorded on the row; the sweep continues.
[[nodiscard]] SweepResult scaling_sweep(const SweepGrid& grid, const SweepOptions& options = {});

/// Ordinary least squares y = slope·x + intercept with coefficient of
/// determination. Needs two distinct abscissae.
[[nodiscard]] RegressionSummary linear_regression(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace collapse
