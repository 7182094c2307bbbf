#include "collapse/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "collapse/error.hpp"
#include "collapse/spectral.hpp"

namespace collapse {

namespace {

ScalingRow run_cell(const CascadeParams& params, std::size_t q, ProfileKind kind, const SweepOptions& options) {
  ScalingRow row;
  row.params = params;
  row.Q = q;
  row.predicted_st_rate = short_time_rate(params);
  row.predicted_lt_rate = long_time_rate(params);
  row.predicted_lt_rate_coarse = long_time_rate_coarse(params);
  try {
    const CouplingProfile profile = build_profile(kind, q, params);
    const ParityBlocks blocks = parity_split(assemble_matrix(profile));
    const Spectrum spectrum = eigen_tridiagonal_first_row(blocks.odd);
    const EvolutionTrace trace = evolve_spectral(spectrum, options.grid);

    const double t_start = options.grid.t0;
    const double t_end = options.grid.end();
    const std::optional<double> zero = first_zero_crossing(trace, t_start);

    const FitWindow st = options.windows.short_time.value_or(FitWindow{t_start, zero.value_or(t_end)});
    row.st_fit = fit_envelope(trace, EnvelopeModel::GaussianST, st);

    if (options.windows.long_time) {
      row.lt_fit = fit_envelope(trace, EnvelopeModel::ExponentialLT, *options.windows.long_time);
    } else if (zero && *zero < t_end) {
      row.lt_fit = fit_envelope(trace, EnvelopeModel::ExponentialLT, FitWindow{*zero, t_end});
    } else {
      throw FitError("alpha_1 never crosses zero; no long-time window");
    }
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

RegressionSummary linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("regression needs two or more (x, y) pairs");
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
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("regression abscissae are all equal");
  RegressionSummary out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  out.points = x.size();
  return out;
}

SweepResult scaling_sweep(const SweepGrid& grid, const SweepOptions& options) {
  options.grid.validate();
  struct Cell {
    CascadeParams params;
    std::size_t q;
  };
  std::vector<Cell> cells;
  for (double r : grid.R)
    for (double n : grid.N)
      for (double a : grid.a)
        for (std::size_t q : grid.Q) cells.push_back({CascadeParams{r, n, a}, q});

  SweepResult result;
  result.rows.resize(cells.size());
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(cells.size(), 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      result.rows[i] = run_cell(cells[i].params, cells[i].q, grid.kind, options);
    }
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cells.size(); i += threads) {
          result.rows[i] = run_cell(cells[i].params, cells[i].q, grid.kind, options);
        }
      });
    }
  }

  std::vector<double> sx, sy, lx, ly;
  for (const ScalingRow& row : result.rows) {
    if (row.st_fit) {
      sx.push_back(row.params.growth() * row.params.a * row.params.a);
      sy.push_back(row.st_fit->rate);
    }
    if (row.lt_fit) {
      lx.push_back(row.predicted_lt_rate);
      ly.push_back(row.lt_fit->rate);
    }
  }
  auto regress = [](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<RegressionSummary> {
    if (x.size() < 2 || std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
      return std::nullopt;
    }
    return linear_regression(x, y);
  };
  result.st_regression = regress(sx, sy);
  result.lt_regression = regress(lx, ly);
  return result;
}

}  // namespace collapse
