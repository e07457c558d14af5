#pragma once

// Entry laws for inhomogeneous random matrices.
//
// Every non-degenerate law is centred with unit variance. Each carries a
// declared subgaussian constant (psi2) that must dominate the law's exact
// psi2 where that can be computed; profiles then bound all declared values by
// a user-supplied cap K.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankprobe/random.hpp"
#include "rankprobe/types.hpp"

namespace rankprobe::ensembles {

enum class LawKind { rademacher, gaussian, uniform, sparse_bernoulli, discrete, degenerate };

struct Atom {
  double value;
  double weight;
};

struct Moments {
  double mean;
  double variance;
};

/// Mean and variance of a finite atomic law, as given (no normalisation).
/// Throws ConfigError on empty input, length mismatch, negative weights or
/// weights not summing to 1 within 1e-12.
Moments discrete_moments(std::span<const double> atoms, std::span<const double> weights);

class DistributionLaw {
 public:
  static DistributionLaw rademacher();
  static DistributionLaw gaussian();
  /// Uniform on [-sqrt(3), sqrt(3)].
  static DistributionLaw uniform();
  /// +-1/sqrt(p) with probability p/2 each, 0 otherwise; p in (0, 1].
  static DistributionLaw sparse_bernoulli(double p);
  /// Atomic law, affinely rescaled to mean 0 and variance 1.
  static DistributionLaw discrete(std::vector<double> atoms, std::vector<double> weights);
  /// Constant zero. Violates the unit-variance condition; exists only as a
  /// test stub and is never produced by parse().
  static DistributionLaw degenerate();

  /// Parses `rademacher`, `gaussian`, `uniform`, `sparse-bernoulli(p)`,
  /// `discrete(a:w;a:w;...)`, each optionally followed by `@psi2`.
  static DistributionLaw parse(std::string_view text);

  /// Same law with a different declared psi2. Throws ConfigError if the
  /// value is not finite and positive, or falls below exact_psi2().
  DistributionLaw with_declared_psi2(double psi2) const;

  LawKind kind() const noexcept { return kind_; }
  double declared_psi2() const noexcept { return declared_psi2_; }
  /// Sparsity parameter of sparse_bernoulli, 1 otherwise.
  double sparsity() const noexcept { return p_; }

  /// Finite support (normalised atoms); nullopt for continuous laws.
  std::optional<std::vector<Atom>> support() const;
  /// Support of X - X' with X' an independent copy, atoms merged.
  std::optional<std::vector<Atom>> symmetrized_support() const;

  /// Exact psi2 norm: closed forms where available, otherwise bisection on
  /// the exact expectation (finite sums, or Simpson quadrature for the
  /// uniform law). nullopt for the degenerate stub.
  std::optional<double> exact_psi2() const;

  /// ess sup |X|; +inf for the Gaussian.
  double sup_abs() const;

  /// Normalised atoms and their cumulative weights (discrete laws only).
  std::span<const double> normalized_atoms() const noexcept { return normalized_; }
  std::span<const double> cumulative_weights() const noexcept { return cumulative_; }

  /// Canonical text accepted by parse(). Includes `@psi2` only when the
  /// declared value differs from the exact one.
  std::string to_string() const;

  friend bool operator==(const DistributionLaw&, const DistributionLaw&) = default;

 private:
  DistributionLaw(LawKind kind, double p, std::vector<double> atoms, std::vector<double> weights);

  LawKind kind_;
  double p_ = 1.0;
  std::vector<double> atoms_;
  std::vector<double> normalized_;
  std::vector<double> cumulative_;
  std::vector<double> weights_;
  double declared_psi2_ = 1.0;
};

/// Draws X from the law.
double sample_entry(const DistributionLaw& law, RandomStream& stream);

/// Draws X - X' with X, X' independent.
double sample_symmetrized(const DistributionLaw& law, RandomStream& stream);

/// (6 + 4K^4)^{-1}, a lower bound on P(|X - X'| >= 1) for any centred,
/// unit-variance law with psi2 <= K. Throws DomainError for K < 1.
double paley_zygmund_floor(double K);

/// Smallest t in (0, 100] with mean(exp((x/t)^2)) <= 2, by bisection to
/// relative tolerance 1e-3. Returns 0 when every sample is 0. Throws
/// EstimationError when even t = 100 does not satisfy the inequality.
double psi2_from_samples(std::span<const double> samples);

/// psi2_from_samples over n_samples fresh draws (n_samples >= 1000).
double psi2_estimate(const DistributionLaw& law, std::size_t n_samples, RandomStream& stream);

/// One assignment rule of a profile: nullopt row/column means "every".
struct LawRule {
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
  DistributionLaw law;
};

/// Grid of per-entry laws. Laws are stored once in a palette and referenced
/// by index, so large homogeneous blocks share storage.
class EntryProfile {
 public:
  /// Every entry drawn from one law.
  EntryProfile(std::size_t rows, std::size_t cols, DistributionLaw law, double K_cap);
  /// Rules are applied in order; later rules override earlier ones. Every
  /// cell must end up covered. Throws ConfigError on an uncovered cell, an
  /// out-of-range index, or a declared psi2 above K_cap.
  EntryProfile(std::size_t rows, std::size_t cols, const std::vector<LawRule>& rules, double K_cap);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double K_cap() const noexcept { return K_cap_; }

  const DistributionLaw& law(std::size_t i, std::size_t j) const { return palette_[index_[i * cols_ + j]]; }
  /// Palette index of entry (i, j); equal indices mean equal laws.
  std::size_t law_index(std::size_t i, std::size_t j) const { return index_[i * cols_ + j]; }
  const std::vector<DistributionLaw>& palette() const noexcept { return palette_; }

  /// True if every entry has |X| <= 1 almost surely.
  bool bounded_by_one() const;

  /// Same rules, different shape. Throws ConfigError if a rule references
  /// an index outside the new shape.
  EntryProfile resized(std::size_t rows, std::size_t cols) const;

  const std::vector<LawRule>& rules() const noexcept { return rules_; }

 private:
  void build();

  std::size_t rows_;
  std::size_t cols_;
  double K_cap_;
  std::vector<LawRule> rules_;
  std::vector<DistributionLaw> palette_;
  std::vector<std::size_t> index_;
};

/// Profile text: `rows = R`, `cols = C`, `K_cap = K`, then one or more
/// `law.<i|*>.<j|*> = <law>` lines applied in order. `#` starts a comment.
EntryProfile parse_profile(std::string_view text);
std::string profile_to_text(const EntryProfile& profile);

/// Parses the `<i|*>.<j|*>` suffix of a law key together with its value.
/// `line` is used only for error reporting.
LawRule parse_law_rule(std::string_view key_suffix, std::string_view value, std::size_t line);
std::string law_rule_key(const LawRule& rule);

/// Matrix with entry (i, j) drawn from profile.law(i, j), row-major order of
/// draws.
Matrix sample_matrix(const EntryProfile& profile, RandomStream& stream);

}  // namespace rankprobe::ensembles
