#include "collapse/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <thread>

#include "collapse/compensated.hpp"
#include "collapse/error.hpp"

namespace collapse {

void TimeGrid::validate() const {
  if (!std::isfinite(t0)) throw InvalidArgument("grid start t0 must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("grid step dt must be positive and finite");
  if (steps == 0) throw InvalidArgument("grid needs at least one step");
  if (!std::isfinite(end())) throw InvalidArgument("grid end is not finite");
}

std::vector<double> EvolutionTrace::abs_alpha1() const {
  std::vector<double> out(alpha1.size());
  std::transform(alpha1.begin(), alpha1.end(), out.begin(), [](double v) { return std::fabs(v); });
  return out;
}

std::vector<double> EvolutionTrace::times() const {
  std::vector<double> out(alpha1.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = grid.time(k);
  return out;
}

EvolutionTrace evolve_spectral(const Spectrum& spectrum, const TimeGrid& grid, const SynthesisOptions& options) {
  grid.validate();
  if (spectrum.weights_sq.size() != spectrum.omega_sq.size()) {
    throw InvalidArgument("spectrum weights and eigenvalues differ in length");
  }
  const std::vector<double> omega = spectrum.frequencies();
  const auto& w = spectrum.weights_sq;
  const std::size_t samples = grid.samples();

  EvolutionTrace trace{grid, std::vector<double>(samples, 0.0), std::nullopt};
  if (options.with_norm_diagnostic) trace.norm_diag.emplace(samples, 0.0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const double t = grid.time(k);
      CompensatedSum alpha;
      for (std::size_t i = 0; i < omega.size(); ++i) alpha += w[i] * std::cos(omega[i] * t);
      trace.alpha1[k] = alpha.value();
      if (trace.norm_diag) (*trace.norm_diag)[k] = complex_norm_diagnostic(spectrum, t);
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, samples);
  if (threads == 1) {
    work(0, samples);
    return trace;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (samples + threads - 1) / threads;
  for (std::size_t begin = 0; begin < samples; begin += chunk) {
    pool.emplace_back(work, begin, std::min(samples, begin + chunk));
  }
  pool.clear();
  return trace;
}

namespace {

class Rk4Oscillator {
 public:
  explicit Rk4Oscillator(const SkipTridiagonalMatrix& matrix)
      : g_(matrix),
        n_(matrix.dimension()),
        x_(n_, 0.0),
        v_(n_, 0.0),
        kx_(4, std::vector<double>(n_)),
        kv_(4, std::vector<double>(n_)),
        xs_(n_),
        vs_(n_) {
    x_[0] = 1.0;
  }

  [[nodiscard]] double x1() const { return x_[0]; }

  [[nodiscard]] double energy() const {
    std::vector<double> gx(n_);
    g_.multiply(x_, gx);
    CompensatedSum e;
    for (std::size_t i = 0; i < n_; ++i) e += v_[i] * v_[i] + x_[i] * gx[i];
    return e.value();
  }

  void step(double h) {
    // Stage derivatives of (x, v): x' = v, v' = -G x.
    auto derivative = [&](const std::vector<double>& x, const std::vector<double>& v, int stage) {
      kx_[stage] = v;
      g_.multiply(x, kv_[stage]);
      for (double& a : kv_[stage]) a = -a;
    };
    auto stage_state = [&](int prev, double scale) {
      for (std::size_t i = 0; i < n_; ++i) {
        xs_[i] = x_[i] + scale * kx_[prev][i];
        vs_[i] = v_[i] + scale * kv_[prev][i];
      }
    };
    derivative(x_, v_, 0);
    stage_state(0, 0.5 * h);
    derivative(xs_, vs_, 1);
    stage_state(1, 0.5 * h);
    derivative(xs_, vs_, 2);
    stage_state(2, h);
    derivative(xs_, vs_, 3);
    const double sixth = h / 6.0;
    for (std::size_t i = 0; i < n_; ++i) {
      x_[i] += sixth * (kx_[0][i] + 2.0 * kx_[1][i] + 2.0 * kx_[2][i] + kx_[3][i]);
      v_[i] += sixth * (kv_[0][i] + 2.0 * kv_[1][i] + 2.0 * kv_[2][i] + kv_[3][i]);
    }
  }

  // Covers a signed duration with equal steps no longer than max_step.
  void advance(double duration, double max_step) {
    if (duration == 0.0) return;
    const auto count = static_cast<std::size_t>(std::ceil(std::fabs(duration) / max_step - 1e-9));
    const double h = duration / static_cast<double>(std::max<std::size_t>(count, 1));
    for (std::size_t s = 0; s < std::max<std::size_t>(count, 1); ++s) step(h);
  }

 private:
  const SkipTridiagonalMatrix& g_;
  std::size_t n_;
  std::vector<double> x_;
  std::vector<double> v_;
  std::vector<std::vector<double>> kx_;
  std::vector<std::vector<double>> kv_;
  std::vector<double> xs_;
  std::vector<double> vs_;
};

}  // namespace

EvolutionTrace evolve_ode(const SkipTridiagonalMatrix& matrix, const TimeGrid& grid, const OdeOptions& options) {
  grid.validate();
  if (options.substeps == 0) throw InvalidArgument("substeps must be at least 1");
  const double h = grid.dt / static_cast<double>(options.substeps);
  const double omega_max = std::sqrt(std::max(gershgorin_interval(matrix).upper, 0.0));
  if (h * omega_max > options.max_phase_step) {
    std::ostringstream msg;
    msg << "internal step " << h << " exceeds " << options.max_phase_step << "/Omega_max with Omega_max = "
        << omega_max << "; increase substeps";
    throw InvalidArgument(msg.str());
  }

  Rk4Oscillator osc(matrix);
  const double e0 = osc.energy();
  auto check_energy = [&](double t) {
    const double drift = std::fabs(osc.energy() - e0);
    const bool bad = e0 > 0.0 ? drift > options.max_energy_drift * e0 : drift > 1e-12;
    if (bad) {
      std::ostringstream msg;
      msg << "energy drift " << drift << " (E0 = " << e0 << ") at t = " << t << " exceeds the guard";
      throw NumericalError(msg.str());
    }
  };

  osc.advance(grid.t0, h);
  EvolutionTrace trace{grid, std::vector<double>(grid.samples(), 0.0), std::nullopt};
  trace.alpha1[0] = osc.x1();
  for (std::size_t k = 1; k < grid.samples(); ++k) {
    for (std::size_t s = 0; s < options.substeps; ++s) osc.step(h);
    trace.alpha1[k] = osc.x1();
    check_energy(grid.time(k));
  }
  return trace;
}

double complex_norm_diagnostic(const Spectrum& spectrum, double t) {
  const std::vector<double> omega = spectrum.frequencies();
  CompensatedSum sum;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const double c = std::cos(omega[i] * t);
    const double s = std::sin(omega[i] * t);
    sum += spectrum.weights_sq[i] * (c * c + s * s);
  }
  return sum.value();
}

std::vector<std::size_t> local_maxima(std::span<const double> values) {
  std::vector<std::size_t> peaks;
  const std::size_t n = values.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (values[i] > values[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && values[j + 1] == values[i]) ++j;
      if (j + 1 < n && values[j + 1] < values[i]) peaks.push_back((i + j) / 2);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return peaks;
}

std::vector<RevivalEvent> recurrence_scan(const EvolutionTrace& trace, double threshold, double t_min) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("revival threshold must lie in (0, 1)");
  if (trace.alpha1.empty()) throw InvalidArgument("trace is empty");
  if (!(t_min >= trace.grid.t0 && t_min <= trace.grid.time(trace.alpha1.size() - 1))) {
    throw InvalidArgument("t_min lies outside the trace span");
  }
  const std::vector<double> magnitude = trace.abs_alpha1();
  std::vector<RevivalEvent> events;
  for (std::size_t k : local_maxima(magnitude)) {
    const double t = trace.grid.time(k);
    if (t > t_min && magnitude[k] >= threshold) events.push_back({t, magnitude[k]});
  }
  return events;
}

}  // namespace collapse
