#include "collapse/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "collapse/error.hpp"

namespace collapse {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + " contains a non-finite entry");
    }
  }
}

void require_dimension(std::span<const double> x, std::size_t dimension) {
  if (x.size() != dimension) {
    throw InvalidArgument("vector length " + std::to_string(x.size()) +
                          " does not match matrix dimension " + std::to_string(dimension));
  }
}

}  // namespace

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::PaperUniform: return "paper_uniform";
    case ProfileKind::Uniform: return "uniform";
    case ProfileKind::Geometric: return "geometric";
    case ProfileKind::Explicit: return "explicit";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(std::string_view name) {
  for (auto kind : {ProfileKind::PaperUniform, ProfileKind::Uniform, ProfileKind::Geometric,
                    ProfileKind::Explicit}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown profile kind '" + std::string(name) + "'");
}

double CascadeParams::growth() const { return R * std::sqrt(N); }

double CouplingProfile::coupling(std::ptrdiff_t i) const {
  if (i <= 0 || i >= static_cast<std::ptrdiff_t>(dimension_)) return 0.0;
  return values_[static_cast<std::size_t>(i - 1)];
}

CouplingProfile build_profile(ProfileKind kind, std::size_t dimension, const CascadeParams& params) {
  if (dimension == 0) throw InvalidArgument("profile dimension Q must be at least 1");
  if (kind == ProfileKind::Explicit) {
    throw InvalidArgument("explicit profiles are built from their values");
  }

  CouplingProfile profile;
  profile.kind_ = kind;
  profile.dimension_ = dimension;
  const std::size_t count = dimension - 1;
  profile.values_.reserve(count);

  if (kind == ProfileKind::PaperUniform) {
    profile.params_ = CascadeParams{};
    for (std::size_t i = 0; i < count; ++i) profile.values_.push_back(i == 0 ? 1.0 : std::sqrt(10.0));
    return profile;
  }

  if (!(params.a > 0.0) || !std::isfinite(params.a)) {
    throw InvalidArgument("base coupling a must be positive and finite");
  }
  if (!(params.R > 0.0) || !std::isfinite(params.R)) {
    throw InvalidArgument("mode count R must be positive and finite");
  }
  if (!(params.N >= 1.0) || !std::isfinite(params.N)) {
    throw InvalidArgument("multiplication fraction N must be finite and at least 1");
  }
  profile.params_ = params;
  const double growth = params.growth();

  if (kind == ProfileKind::Uniform) {
    for (std::size_t i = 0; i < count; ++i) profile.values_.push_back(i == 0 ? params.a : params.a * growth);
    return profile;
  }

  // Geometric: the diagonal holds sums of squared couplings, so the largest
  // squared coupling (doubled) must stay inside the normal range.
  if (count > 1) {
    const double log_last = std::log(params.a) + static_cast<double>(count - 1) * std::log(growth);
    const double log_max = std::log(std::numeric_limits<double>::max());
    const double log_min = std::log(std::numeric_limits<double>::min());
    if (2.0 * log_last + std::log(2.0) >= log_max) {
      throw InvalidArgument("geometric profile overflows: a_{Q-1}^2 exceeds the double range");
    }
    if (2.0 * log_last <= log_min) {
      throw InvalidArgument("geometric profile underflows: a_{Q-1}^2 below the normal double range");
    }
  }
  double value = params.a;
  for (std::size_t i = 0; i < count; ++i) {
    profile.values_.push_back(value);
    value *= growth;
  }
  return profile;
}

CouplingProfile explicit_profile(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw InvalidArgument("explicit couplings must be strictly positive and finite");
    }
  }
  CouplingProfile profile;
  profile.kind_ = ProfileKind::Explicit;
  profile.dimension_ = values.size() + 1;
  profile.values_ = std::move(values);
  return profile;
}

SkipTridiagonalMatrix::SkipTridiagonalMatrix(std::vector<double> diag, std::vector<double> skip)
    : diag_(std::move(diag)), skip_(std::move(skip)) {
  if (diag_.empty()) throw InvalidArgument("matrix dimension must be at least 1");
  const std::size_t expected = diag_.size() >= 2 ? diag_.size() - 2 : 0;
  if (skip_.size() != expected) {
    throw InvalidArgument("skip band must have " + std::to_string(expected) + " entries, got " +
                          std::to_string(skip_.size()));
  }
  require_finite(diag_, "diagonal");
  require_finite(skip_, "skip band");
}

double SkipTridiagonalMatrix::at(std::size_t row, std::size_t col) const {
  if (row >= dimension() || col >= dimension()) throw InvalidArgument("matrix index out of range");
  if (row == col) return diag_[row];
  const std::size_t lo = std::min(row, col);
  if (std::max(row, col) - lo == 2) return skip_[lo];
  return 0.0;
}

void SkipTridiagonalMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = dimension();
  require_dimension(x, n);
  require_dimension(y, n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag_[i] * x[i];
    if (i >= 2) acc += skip_[i - 2] * x[i - 2];
    if (i + 2 < n) acc += skip_[i] * x[i + 2];
    y[i] = acc;
  }
}

SkipTridiagonalMatrix assemble_matrix(const CouplingProfile& profile) {
  const auto q = static_cast<std::ptrdiff_t>(profile.dimension());
  std::vector<double> diag;
  std::vector<double> skip;
  diag.reserve(static_cast<std::size_t>(q));
  for (std::ptrdiff_t i = 1; i <= q; ++i) {
    const double prev = profile.coupling(i - 1);
    const double cur = profile.coupling(i);
    diag.push_back(prev * prev + cur * cur);
  }
  for (std::ptrdiff_t i = 1; i + 2 <= q; ++i) {
    skip.push_back(profile.coupling(i) * profile.coupling(i + 1));
  }
  return SkipTridiagonalMatrix(std::move(diag), std::move(skip));
}

double quadratic_form(const SkipTridiagonalMatrix& matrix, std::span<const double> x) {
  const std::size_t n = matrix.dimension();
  require_dimension(x, n);
  const auto d = matrix.diag();
  const auto s = matrix.skip();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += d[i] * x[i] * x[i];
  for (std::size_t i = 0; i + 2 < n; ++i) acc += 2.0 * s[i] * x[i] * x[i + 2];
  return acc;
}

double sum_of_squares_form(const CouplingProfile& profile, std::span<const double> x) {
  const auto q = static_cast<std::ptrdiff_t>(profile.dimension());
  require_dimension(x, profile.dimension());
  // x_j is one-based here; zero outside 1..Q.
  auto xj = [&](std::ptrdiff_t j) {
    return (j >= 1 && j <= q) ? x[static_cast<std::size_t>(j - 1)] : 0.0;
  };
  double acc = 0.0;
  for (std::ptrdiff_t i = 0; i < q; ++i) {
    const double term = profile.coupling(i) * xj(i) + profile.coupling(i + 1) * xj(i + 2);
    acc += term * term;
  }
  return acc;
}

ParityBlocks parity_split(const SkipTridiagonalMatrix& matrix) {
  ParityBlocks blocks;
  blocks.odd.parity = Parity::Odd;
  blocks.even.parity = Parity::Even;
  const auto d = matrix.diag();
  const auto s = matrix.skip();
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto& block = (i % 2 == 0) ? blocks.odd : blocks.even;
    block.diag.push_back(d[i]);
    if (i < s.size()) block.off.push_back(s[i]);
  }
  return blocks;
}

SkipTridiagonalMatrix perturb_matrix(const SkipTridiagonalMatrix& matrix, double magnitude,
                                     std::uint64_t seed) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw InvalidArgument("perturbation magnitude must be finite and non-negative");
  }
  std::vector<double> diag(matrix.diag().begin(), matrix.diag().end());
  std::vector<double> skip(matrix.skip().begin(), matrix.skip().end());
  if (magnitude == 0.0) return SkipTridiagonalMatrix(std::move(diag), std::move(skip));

  std::mt19937_64 engine(seed);
  auto uniform = [&] {
    const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;  // [0, 1)
    return magnitude * (2.0 * unit - 1.0);
  };
  for (double& v : diag) v *= 1.0 + uniform();
  for (double& v : skip) v *= 1.0 + uniform();
  return SkipTridiagonalMatrix(std::move(diag), std::move(skip));
}

Interval gershgorin_interval(const SkipTridiagonalMatrix& matrix) {
  const auto d = matrix.diag();
  const auto s = matrix.skip();
  const std::size_t n = d.size();
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i >= 2) radius += std::fabs(s[i - 2]);
    if (i < s.size()) radius += std::fabs(s[i]);
    out.lower = std::min(out.lower, d[i] - radius);
    out.upper = std::max(out.upper, d[i] + radius);
  }
  return out;
}

}  // namespace collapse
