#include "collapse/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "collapse/error.hpp"

namespace collapse {

namespace {

// 15-point Kronrod nodes on [0, 1] (symmetric about 0) with the embedded
// 7-point Gauss rule.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  double kronrod;
  double error;
};

Estimate gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  if (!std::isfinite(kronrod) || !std::isfinite(gauss)) throw NumericalError("integrand is not finite on the interval");
  return {kronrod * half, std::fabs((kronrod - gauss) * half)};
}

struct Piece {
  double lo;
  double hi;
  Estimate estimate;
  int depth;
};

// Global adaptive scheme: keep splitting the interval with the largest error
// estimate until the summed estimate meets the tolerance (or the roundoff
// floor of the accumulated magnitude).
QuadratureResult adaptive(const std::function<double(double)>& f, double lo, double hi, double tol, int max_depth) {
  const auto worse = [](const Piece& a, const Piece& b) { return a.estimate.error < b.estimate.error; };
  std::vector<Piece> heap{{lo, hi, gauss_kronrod(f, lo, hi), 0}};
  double value = heap.front().estimate.kronrod;
  double error = heap.front().estimate.error;
  double magnitude = std::fabs(value);
  while (error > std::max(tol, 50.0 * std::numeric_limits<double>::epsilon() * magnitude)) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Piece worst = heap.back();
    heap.pop_back();
    if (worst.depth >= max_depth) throw NumericalError("adaptive quadrature exhausted its subdivision depth");
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Piece left{worst.lo, mid, gauss_kronrod(f, worst.lo, mid), worst.depth + 1};
    const Piece right{mid, worst.hi, gauss_kronrod(f, mid, worst.hi), worst.depth + 1};
    value += left.estimate.kronrod + right.estimate.kronrod - worst.estimate.kronrod;
    error += left.estimate.error + right.estimate.error - worst.estimate.error;
    magnitude += std::fabs(left.estimate.kronrod) + std::fabs(right.estimate.kronrod) - std::fabs(worst.estimate.kronrod);
    for (const Piece& p : {left, right}) {
      heap.push_back(p);
      std::push_heap(heap.begin(), heap.end(), worse);
    }
  }
  // Re-sum from the leaves to shed the drift of the running updates.
  QuadratureResult out;
  for (const Piece& p : heap) {
    out.value += p.estimate.kronrod;
    out.error_estimate += p.estimate.error;
  }
  return out;
}

// Wynn's epsilon algorithm on a short sequence of partial sums; returns the
// last entry of the highest even column.
double wynn_epsilon(const std::vector<double>& sums) {
  const std::size_t m = sums.size();
  std::vector<double> prev(m, 0.0);  // column k-1
  std::vector<double> cur = sums;    // column k
  double best = sums.back();
  for (std::size_t k = 1; k < m; ++k) {
    std::vector<double> next(m - k);
    for (std::size_t n = 0; n + k < m; ++n) {
      const double diff = cur[n + 1] - cur[n];
      if (diff == 0.0) return cur[n + 1];
      next[n] = prev[n + 1] + 1.0 / diff;
    }
    prev = std::move(cur);
    cur = std::move(next);
    if (k % 2 == 0) best = cur.back();
  }
  return best;
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double abs_tolerance, int max_depth) {
  if (hi == lo) return {};
  QuadratureResult out = adaptive(f, lo, hi, abs_tolerance, max_depth);
  out.windows = 1;
  return out;
}

QuadratureResult integrate_cos_transform(const std::function<double(double)>& envelope, double t,
                                         const QuadratureOptions& options) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("transform variable t must be finite and >= 0");
  const auto integrand = [&](double x) { return envelope(x) * std::cos(x * t); };
  const bool oscillatory = t > 0.0;
  const double half_period = oscillatory ? std::numbers::pi / t : 0.0;
  const double window_tol = options.abs_tolerance * 1e-3;

  QuadratureResult result;
  std::vector<double> partial;  // running sums at window ends (tail only)
  std::vector<double> extrapolations;
  double envelope_peak = 0.0;
  double lo = 0.0;
  double sum = 0.0;
  double error = 0.0;

  constexpr std::size_t kWynnLength = 21;
  constexpr std::size_t kMinWindowsBeforeStop = 10;

  for (std::size_t k = 0; k < options.max_windows; ++k) {
    const double hi = oscillatory ? static_cast<double>(k + 1) * half_period : (k == 0 ? 1.0 : 2.0 * lo);
    const double at_lo = std::fabs(envelope(lo));
    envelope_peak = std::max(envelope_peak, at_lo);
    if (k > 0 && at_lo < options.truncation && std::fabs(envelope(hi)) <= at_lo) {
      result.value = sum;
      result.error_estimate = error;
      result.windows = k;
      return result;
    }
    const QuadratureResult piece = integrate_adaptive(integrand, lo, hi, window_tol, options.max_depth);
    sum += piece.value;
    error += piece.error_estimate;
    lo = hi;

    if (!oscillatory) continue;
    partial.push_back(sum);
    if (partial.size() > kWynnLength) partial.erase(partial.begin());
    if (k + 1 < kMinWindowsBeforeStop || partial.size() < 5) continue;
    if (std::fabs(envelope(lo)) > 1e-3 * envelope_peak) continue;  // not yet in the decaying tail

    extrapolations.push_back(wynn_epsilon(partial));
    const std::size_t e = extrapolations.size();
    if (e >= 3) {
      const double spread = std::max(std::fabs(extrapolations[e - 1] - extrapolations[e - 2]),
                                     std::fabs(extrapolations[e - 2] - extrapolations[e - 3]));
      if (spread <= 0.1 * options.abs_tolerance) {
        result.value = extrapolations[e - 1];
        result.error_estimate = error + spread;
        result.windows = k + 1;
        result.extrapolated = true;
        return result;
      }
    }
  }
  throw NumericalError("oscillatory quadrature did not converge within the window budget");
}

}  // namespace collapse
