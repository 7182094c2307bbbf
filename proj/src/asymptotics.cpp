#include "collapse/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "collapse/compensated.hpp"
#include "collapse/error.hpp"

namespace collapse {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be positive and finite");
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("t must be finite and non-negative");
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw FitError("fit abscissae are all equal");
  Line line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (line.intercept + line.slope * x[i]);
    ss += r * r;
  }
  line.rms = std::sqrt(ss / n);
  return line;
}

}  // namespace

double quartic_cos_integral(double t, double B) {
  require_time(t);
  require_positive(B, "B");
  const double scale = std::pow(B, -0.25);
  const QuadratureResult unit =
      integrate_cos_transform([](double x) { return std::exp(-x * x * x * x); }, t * scale);
  return scale * unit.value;
}

double quartic_cos_small_t(double t) { return kQuarticAtZero * std::exp(-kQuarticGaussRate * t * t); }

double quartic_cos_large_t_envelope(double t) {
  require_positive(t, "t");
  const double c = std::cbrt(2.0);
  return std::pow(2.0, 1.0 / 6.0) * std::sqrt(kPi / 3.0) / std::cbrt(t) *
         std::exp(-(3.0 * c / 16.0) * std::pow(t, 4.0 / 3.0));
}

double quartic_cos_large_t(double t) {
  const double phase = std::pow(3.0, 1.5) * std::cbrt(2.0) / 16.0 * std::pow(t, 4.0 / 3.0) - kPi / 6.0;
  return quartic_cos_large_t_envelope(t) * std::cos(phase);
}

double lorentzian_sq_cos_integral(double t, double A) {
  require_time(t);
  require_positive(A, "A");
  const double a2 = A * A;
  return integrate_cos_transform(
             [a2](double x) {
               const double u = x * x - 1.0;
               return 1.0 / (1.0 + a2 * u * u);
             },
             t)
      .value;
}

double lorentzian_sq_cos_closed_envelope(double t, double A) {
  require_time(t);
  require_positive(A, "A");
  return kPi / (2.0 * std::sqrt(A)) * std::exp(-t / std::sqrt(2.0 * A));
}

double lorentzian_sq_cos_closed(double t, double A) {
  return lorentzian_sq_cos_closed_envelope(t, A) * std::cos(t / std::sqrt(2.0 * A) - kPi / 4.0);
}

double short_time_rate(const CascadeParams& p) { return kQuarticGaussRate * p.growth() * p.a * p.a; }

double long_time_rate_coarse(const CascadeParams& p) { return p.a * std::sqrt(p.growth()); }

double long_time_rate(const CascadeParams& p) { return long_time_rate_coarse(p) / std::numbers::sqrt2; }

double short_time_envelope(double t, const CascadeParams& p) { return std::exp(-short_time_rate(p) * t * t); }

double long_time_envelope(double t, const CascadeParams& p) { return std::exp(-long_time_rate(p) * t); }

DensityEstimate density_of_eigenvalues(const Spectrum& spectrum, const std::optional<CascadeParams>& params) {
  if (spectrum.size() < 3) throw InvalidArgument("density estimate needs at least three eigenvalues");
  const std::vector<double> omega = spectrum.frequencies();
  DensityEstimate out;
  for (std::size_t i = 0; i + 1 < omega.size(); ++i) {
    const double width = omega[i + 1] - omega[i];
    if (width <= 0.0) continue;
    out.bin_lo.push_back(omega[i]);
    out.bin_hi.push_back(omega[i + 1]);
    out.density.push_back(1.0 / width);
  }

  std::vector<double> index(omega.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<double>(i);
  out.uniform_fit = least_squares(omega, index).slope;

  const std::size_t bins = out.density.size();
  const std::size_t skip = bins / 10;
  const std::size_t first = skip;
  const std::size_t last = std::max(bins - skip, first + 1);
  double mean = 0.0;
  for (std::size_t k = first; k < last && k < bins; ++k) mean += out.density[k];
  const auto count = static_cast<double>(std::min(last, bins) - first);
  mean /= count;
  double var = 0.0;
  for (std::size_t k = first; k < last && k < bins; ++k) var += (out.density[k] - mean) * (out.density[k] - mean);
  out.bulk_variation = mean > 0.0 ? std::sqrt(var / count) / mean : 0.0;

  if (params) {
    const double a2 = params->a * params->a;
    const double B = 1.0 / (params->R * params->R * params->N * a2 * a2);
    out.normalization = std::pow(B, 0.25) / kQuarticAtZero;
  }
  return out;
}

std::string_view to_string(EnvelopeModel model) {
  return model == EnvelopeModel::GaussianST ? "gaussian_st" : "exponential_lt";
}

std::optional<double> first_zero_crossing(const EvolutionTrace& trace, double t_lo) {
  const auto& y = trace.alpha1;
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (trace.grid.time(k) < t_lo) continue;
    if (y[k] == 0.0) return trace.grid.time(k);
    if ((y[k - 1] > 0.0) != (y[k] > 0.0) && y[k - 1] != 0.0) {
      const double frac = y[k - 1] / (y[k - 1] - y[k]);
      return trace.grid.time(k - 1) + frac * trace.grid.dt;
    }
  }
  return std::nullopt;
}

EnvelopeFit fit_envelope(const EvolutionTrace& trace, EnvelopeModel model, FitWindow window) {
  if (!(window.hi > window.lo)) throw InvalidArgument("fit window must have hi > lo");
  const double span_lo = trace.grid.t0;
  const double span_hi = trace.grid.time(trace.alpha1.empty() ? 0 : trace.alpha1.size() - 1);
  if (window.lo < span_lo - 1e-12 || window.hi > span_hi + 1e-12) {
    throw InvalidArgument("fit window lies outside the trace span");
  }

  EnvelopeFit fit;
  fit.model = model;
  std::vector<double> x;
  std::vector<double> y;
  double used_lo = 0.0;
  double used_hi = 0.0;

  if (model == EnvelopeModel::GaussianST) {
    int sign = 0;
    for (std::size_t k = 0; k < trace.alpha1.size(); ++k) {
      const double t = trace.grid.time(k);
      if (t < window.lo) continue;
      if (t > window.hi) break;
      const double v = trace.alpha1[k];
      if (v == 0.0) break;
      const int s = v > 0.0 ? 1 : -1;
      if (sign != 0 && s != sign) break;
      sign = s;
      if (x.empty()) used_lo = t;
      used_hi = t;
      x.push_back(t * t);
      y.push_back(std::log(std::fabs(v)));
    }
    if (x.size() < 10) {
      throw FitError("Gaussian fit needs at least 10 samples before the first zero crossing, got " +
                     std::to_string(x.size()));
    }
  } else {
    const std::vector<double> mag = trace.abs_alpha1();
    for (std::size_t k : local_maxima(mag)) {
      const double t = trace.grid.time(k);
      if (t < window.lo || t > window.hi) continue;
      // Parabola through the peak sample and its neighbours.
      const double ym = mag[k - 1];
      const double y0 = mag[k];
      const double yp = mag[k + 1];
      const double denom = ym - 2.0 * y0 + yp;
      double offset = 0.0;
      double peak = y0;
      if (denom < 0.0) {
        offset = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
        peak = y0 - 0.25 * (ym - yp) * offset;
      }
      if (!(peak > 0.0)) continue;
      const double tp = t + offset * trace.grid.dt;
      if (x.empty()) used_lo = tp;
      used_hi = tp;
      x.push_back(tp);
      y.push_back(std::log(peak));
    }
    if (x.size() < 5) {
      throw FitError("exponential fit needs at least 5 envelope peaks in the window, got " +
                     std::to_string(x.size()));
    }
  }

  const Line line = least_squares(x, y);
  fit.rate = -line.slope;
  fit.amplitude = std::exp(line.intercept);
  fit.window = {used_lo, used_hi};
  fit.rms_residual = line.rms;
  fit.points = x.size();
  fit.decaying = fit.rate > 0.0;
  return fit;
}

}  // namespace collapse
