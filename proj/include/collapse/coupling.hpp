#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace collapse {

enum class ProfileKind { PaperUniform, Uniform, Geometric, Explicit };

[[nodiscard]] std::string_view to_string(ProfileKind kind);
/// Accepts the snake_case spelling used in config files ("paper_uniform", ...).
[[nodiscard]] ProfileKind profile_kind_from_string(std::string_view name);

/// Cascade parameters shared by the coupling rules and the closed-form
/// envelopes: base coupling a, macroscopic mode count R, multiplication
/// fraction N.
struct CascadeParams {
  double R = 1.0;
  double N = 1.0;
  double a = 1.0;

  /// R·sqrt(N), the ratio between successive couplings.
  [[nodiscard]] double growth() const;

  friend bool operator==(const CascadeParams&, const CascadeParams&) = default;
};

/// The couplings a_1 ... a_{Q-1} of a Q-dimensional frequency matrix.
///
/// Instances are only produced by build_profile / explicit_profile, which
/// guarantee Q-1 strictly positive finite values.
class CouplingProfile {
 public:
  [[nodiscard]] ProfileKind kind() const { return kind_; }
  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] const CascadeParams& params() const { return params_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  /// a_i with the boundary convention a_0 = a_Q = 0 (and zero outside [0, Q]).
  [[nodiscard]] double coupling(std::ptrdiff_t i) const;

  friend bool operator==(const CouplingProfile&, const CouplingProfile&) = default;

 private:
  friend CouplingProfile build_profile(ProfileKind, std::size_t, const CascadeParams&);
  friend CouplingProfile explicit_profile(std::vector<double>);

  ProfileKind kind_ = ProfileKind::Explicit;
  std::size_t dimension_ = 1;
  CascadeParams params_{};
  std::vector<double> values_;
};

/// Materializes one of the rule-based profiles.
///
/// PaperUniform ignores params (a_1 = 1, a_i = sqrt(10)); Uniform uses
/// a_i = a·R·sqrt(N) for i > 1; Geometric uses a_i = a·(R·sqrt(N))^(i-1).
/// Throws InvalidArgument for Q = 0, non-positive a or R, N < 1, Explicit
/// kind, and for Geometric profiles whose squared couplings would leave the
/// normal double range.
[[nodiscard]] CouplingProfile build_profile(ProfileKind kind, std::size_t dimension,
                                            const CascadeParams& params = {});

/// Profile with caller-supplied couplings; Q = values.size() + 1.
[[nodiscard]] CouplingProfile explicit_profile(std::vector<double> values);

/// Symmetric Q×Q matrix whose only non-zeros are the diagonal and the band at
/// index distance two. O(Q) storage.
class SkipTridiagonalMatrix {
 public:
  /// diag has Q entries, skip has max(Q-2, 0); all finite.
  SkipTridiagonalMatrix(std::vector<double> diag, std::vector<double> skip);

  [[nodiscard]] std::size_t dimension() const { return diag_.size(); }
  [[nodiscard]] std::span<const double> diag() const { return diag_; }
  /// skip()[i] couples rows i and i+2 (zero-based).
  [[nodiscard]] std::span<const double> skip() const { return skip_; }

  /// Dense element access (zero-based), mostly for oracles and tests.
  [[nodiscard]] double at(std::size_t row, std::size_t col) const;

  /// y = G·x.
  void multiply(std::span<const double> x, std::span<double> y) const;

  friend bool operator==(const SkipTridiagonalMatrix&, const SkipTridiagonalMatrix&) = default;

 private:
  std::vector<double> diag_;
  std::vector<double> skip_;
};

[[nodiscard]] SkipTridiagonalMatrix assemble_matrix(const CouplingProfile& profile);

/// x·G·x evaluated from the stored entries.
[[nodiscard]] double quadratic_form(const SkipTridiagonalMatrix& matrix, std::span<const double> x);

/// The same quadratic form written as a sum of squares,
/// sum_{i=0}^{Q-1} (a_i x_i + a_{i+1} x_{i+2})^2 with a_0 = a_Q = 0 and
/// out-of-range x_j = 0. Non-negative by construction.
[[nodiscard]] double sum_of_squares_form(const CouplingProfile& profile, std::span<const double> x);

enum class Parity { Odd, Even };

/// One of the two decoupled tridiagonal blocks of a skip-tridiagonal matrix.
struct TridiagonalBlock {
  Parity parity = Parity::Odd;
  std::vector<double> diag;
  std::vector<double> off;

  [[nodiscard]] std::size_t size() const { return diag.size(); }
  friend bool operator==(const TridiagonalBlock&, const TridiagonalBlock&) = default;
};

struct ParityBlocks {
  TridiagonalBlock odd;   // original (one-based) indices 1, 3, 5, ...
  TridiagonalBlock even;  // original indices 2, 4, 6, ...
};

[[nodiscard]] ParityBlocks parity_split(const SkipTridiagonalMatrix& matrix);

/// Multiplies every diag and skip entry by (1 + u), u uniform on
/// [-magnitude, magnitude]. The generator is a seeded mt19937_64 with an
/// explicit 53-bit mantissa mapping, so output is reproducible across
/// standard libraries.
[[nodiscard]] SkipTridiagonalMatrix perturb_matrix(const SkipTridiagonalMatrix& matrix,
                                                   double magnitude, std::uint64_t seed);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Union of the Gershgorin discs: [min(d_i - r_i), max(d_i + r_i)].
[[nodiscard]] Interval gershgorin_interval(const SkipTridiagonalMatrix& matrix);

}  // namespace collapse
