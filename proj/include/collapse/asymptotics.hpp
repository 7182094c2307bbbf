#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "collapse/coupling.hpp"
#include "collapse/dynamics.hpp"
#include "collapse/quadrature.hpp"
#include "collapse/spectral.hpp"

namespace collapse {

/// Value of the quartic integral at t = 0 with B = 1, i.e. Gamma(5/4) to the
/// six digits used by the envelope formulas.
inline constexpr double kQuarticAtZero = 0.906402;
/// Second Taylor coefficient: I(t) ~ 0.906402 - 0.153177 t^2.
inline constexpr double kQuarticCurvature = 0.153177;
/// Gaussian rate of the resummed small-t form 0.906402·exp(-0.168995 t^2).
inline constexpr double kQuarticGaussRate = 0.168995;

// --- quartic-Gaussian Fourier integral -------------------------------------

/// Integral over [0, inf) of exp(-B x^4) cos(x t), computed on the unit
/// problem and rescaled: I(t, B) = B^{-1/4} I(t B^{-1/4}, 1).
/// Accurate to ~1e-9 absolute.
[[nodiscard]] double quartic_cos_integral(double t, double B = 1.0);

/// 0.906402·exp(-0.168995 t^2); meaningful for t below ~1.
[[nodiscard]] double quartic_cos_small_t(double t);

/// Saddle-point form 2^{1/6} sqrt(pi/3) t^{-1/3} exp(-(3·2^{1/3}/16) t^{4/3})
/// · cos(3^{3/2} 2^{1/3}/16 · t^{4/3} - pi/6); meaningful above t ~ 5.
[[nodiscard]] double quartic_cos_large_t(double t);
/// The non-oscillating prefactor of quartic_cos_large_t.
[[nodiscard]] double quartic_cos_large_t_envelope(double t);

// --- Lorentzian-squared Fourier integral -----------------------------------

/// Integral over [0, inf) of cos(x t) / (1 + A^2 (x^2 - 1)^2).
[[nodiscard]] double lorentzian_sq_cos_integral(double t, double A);

/// (pi / (2 sqrt(A))) exp(-t/sqrt(2A)) cos(t/sqrt(2A) - pi/4), valid for A << 1.
[[nodiscard]] double lorentzian_sq_cos_closed(double t, double A);
[[nodiscard]] double lorentzian_sq_cos_closed_envelope(double t, double A);

// --- collapse envelopes ------------------------------------------------------

/// k = 0.168995 · R sqrt(N) a^2, the short-time Gaussian rate.
[[nodiscard]] double short_time_rate(const CascadeParams& params);
/// a sqrt(R sqrt(N)) / sqrt(2): exponent of the exact Lorentzian transform.
[[nodiscard]] double long_time_rate(const CascadeParams& params);
/// a sqrt(R sqrt(N)): the order-of-magnitude rate quoted without the sqrt(2).
[[nodiscard]] double long_time_rate_coarse(const CascadeParams& params);

/// exp(-short_time_rate · t^2).
[[nodiscard]] double short_time_envelope(double t, const CascadeParams& params);
/// exp(-long_time_rate · t).
[[nodiscard]] double long_time_envelope(double t, const CascadeParams& params);

// --- density of eigenvalues ------------------------------------------------

struct DensityEstimate {
  /// Bin k spans [omega_k, omega_{k+1}] of the sorted frequencies; density is
  /// 1 / width (one eigenvalue per bin). Zero-width bins are dropped.
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> density;
  /// Least-squares slope of eigenvalue index against Omega_i.
  double uniform_fit = 0.0;
  /// Coefficient of variation of density over the central 80% of bins.
  double bulk_variation = 0.0;
  /// B^{1/4} / 0.906402 with B = 1/(R^2 N a^4): the constant that makes the
  /// short-time integral start at one. Present only when params were given.
  std::optional<double> normalization;
};

[[nodiscard]] DensityEstimate density_of_eigenvalues(const Spectrum& spectrum,
                                                     const std::optional<CascadeParams>& params = std::nullopt);

// --- envelope fitting --------------------------------------------------------

enum class EnvelopeModel { GaussianST, ExponentialLT };

[[nodiscard]] std::string_view to_string(EnvelopeModel model);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const FitWindow&, const FitWindow&) = default;
};

struct EnvelopeFit {
  EnvelopeModel model = EnvelopeModel::GaussianST;
  double rate = 0.0;       // k in exp(-k t^2) or lambda in exp(-lambda t)
  double amplitude = 0.0;  // prefactor of the fitted envelope
  FitWindow window;        // sample range actually used
  double rms_residual = 0.0;  // on log|envelope|
  std::size_t points = 0;
  bool decaying = true;  // false when rate <= 0
};

/// Least-squares fit of log|alpha_1| against t^2 (GaussianST) or of the log
/// of the local maxima of |alpha_1| against t (ExponentialLT).
///
/// GaussianST uses the samples of the window up to the first sign change of
/// alpha_1 and needs at least 10 of them. ExponentialLT uses peaks inside the
/// window, each refined by a parabola through its three samples, and needs at
/// least 5. Throws FitError when there is not enough data.
[[nodiscard]] EnvelopeFit fit_envelope(const EvolutionTrace& trace, EnvelopeModel model, FitWindow window);

/// Time of the first sign change of alpha_1 at or after t_lo (linear
/// interpolation), or nullopt if the trace never crosses zero.
[[nodiscard]] std::optional<double> first_zero_crossing(const EvolutionTrace& trace, double t_lo = 0.0);

}  // namespace collapse
