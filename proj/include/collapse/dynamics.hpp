#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "collapse/coupling.hpp"
#include "collapse/spectral.hpp"

namespace collapse {

/// Uniform sampling t_k = t0 + k·dt, k = 0..steps (steps + 1 samples).
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.01;
  std::size_t steps = 10000;

  [[nodiscard]] std::size_t samples() const { return steps + 1; }
  [[nodiscard]] double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  [[nodiscard]] double span() const { return static_cast<double>(steps) * dt; }
  [[nodiscard]] double end() const { return time(steps); }
  /// Throws InvalidArgument unless dt > 0, steps >= 1 and everything is finite.
  void validate() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Signed amplitude alpha_1 sampled on a grid.
struct EvolutionTrace {
  TimeGrid grid;
  std::vector<double> alpha1;
  /// Optional per-sample complexified norm, see complex_norm_diagnostic.
  std::optional<std::vector<double>> norm_diag;

  [[nodiscard]] std::vector<double> abs_alpha1() const;
  [[nodiscard]] std::vector<double> times() const;
};

struct SynthesisOptions {
  /// Worker threads over contiguous chunks of the time grid. Each sample is
  /// an independent sequential sum, so the result does not depend on this.
  unsigned threads = 1;
  bool with_norm_diagnostic = false;
};

/// alpha_1(t_k) = sum_i w_i^2 cos(Omega_i t_k), compensated summation.
[[nodiscard]] EvolutionTrace evolve_spectral(const Spectrum& spectrum, const TimeGrid& grid,
                                             const SynthesisOptions& options = {});

struct OdeOptions {
  std::size_t substeps = 10;
  /// Largest allowed h·Omega_max with h = dt / substeps.
  double max_phase_step = 0.2;
  /// Largest allowed |E(t) - E(0)| / E(0), E = v·v + x·G·x.
  double max_energy_drift = 1e-5;
};

/// Classical RK4 on x'' = -G x with x(0) = e_1, x'(0) = 0; returns x_1 on
/// the grid. Serves as the independent route for evolve_spectral.
/// Throws InvalidArgument when the internal step violates the phase guard
/// (Omega_max from the Gershgorin upper bound) and NumericalError when the
/// energy drift guard trips.
[[nodiscard]] EvolutionTrace evolve_ode(const SkipTridiagonalMatrix& matrix, const TimeGrid& grid,
                                        const OdeOptions& options = {});

/// sum_i w_i^2 (cos^2(Omega_i t) + sin^2(Omega_i t)), compensated. Equal to
/// sum_i w_i^2 = 1 in exact arithmetic; exposes roundoff of the synthesis.
[[nodiscard]] double complex_norm_diagnostic(const Spectrum& spectrum, double t);

/// Indices of strict local maxima of values (interior samples only). A flat
/// run counts once, at its middle sample, if both neighbours are lower.
[[nodiscard]] std::vector<std::size_t> local_maxima(std::span<const double> values);

struct RevivalEvent {
  double time = 0.0;
  double magnitude = 0.0;  // |alpha_1| at the peak sample
};

/// Local maxima of |alpha_1| with t > t_min and |alpha_1| >= threshold, in
/// time order. Empty means no revival at this threshold in the window.
[[nodiscard]] std::vector<RevivalEvent> recurrence_scan(const EvolutionTrace& trace, double threshold,
                                                        double t_min);

}  // namespace collapse
