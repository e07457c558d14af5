#pragma once

// Arithmetic structure of vectors relative to the integer lattice: lattice
// distances, the randomized least common denominator (RLCD) and the
// small-ball quantities it controls.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rankprobe/ensembles.hpp"
#include "rankprobe/random.hpp"
#include "rankprobe/types.hpp"

namespace rankprobe::arithmetic {

/// sqrt(sum_i (y_i - round(y_i))^2), the distance from y to Z^n.
double dist_to_lattice(std::span<const double> y);
inline double dist_to_lattice(const Vector& y) { return dist_to_lattice(std::span<const double>(y.data(), y.size())); }

/// Coordinate-wise product. Throws DomainError on length mismatch.
Vector schur_product(const Vector& x, const Vector& y);

/// max(0, ln x).
inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

/// Law of one symmetrised matrix column Xbar = X - X', prepared so that
/// E dist^2(y * Xbar, Z^n) is a sum of weighted lattice residuals.
///
/// The expectation separates over coordinates, so when every coordinate's
/// law has finite support the model is exact: each coordinate keeps its
/// symmetrised atoms (folded onto |a| > 0, since dist^2 is even). Otherwise
/// it holds mc_trials joint draws with weight 1/mc_trials each; those draws
/// are fixed at construction, so repeated evaluations share them.
class SymmetrizedColumn {
 public:
  /// Atoms per coordinate above which the exact form is abandoned.
  static constexpr std::size_t kMaxExactAtoms = 256;

  SymmetrizedColumn(const ensembles::EntryProfile& profile, std::size_t column, std::size_t mc_trials,
                    RandomStream& stream);

  std::size_t dim() const noexcept { return dim_; }
  bool exact() const noexcept { return exact_; }
  std::size_t rows() const noexcept { return rows_; }

  double expected_dist2(std::span<const double> y) const;

 private:
  std::size_t dim_;
  std::size_t rows_ = 0;
  bool exact_ = true;
  std::vector<double> atoms_;    // rows_ x dim_, row-major
  std::vector<double> weights_;  // rows_ x dim_
};

/// Minimum of E dist^2(y * Xbar_j, Z^n) over a set of columns j. Columns
/// with identical law sequences share one model.
class LatticeDistanceModel {
 public:
  LatticeDistanceModel(const ensembles::EntryProfile& profile, const std::vector<std::size_t>& columns,
                       std::size_t mc_trials, RandomStream& stream);
  /// All columns of the profile.
  LatticeDistanceModel(const ensembles::EntryProfile& profile, std::size_t mc_trials, RandomStream& stream);

  std::size_t dim() const noexcept { return dim_; }
  bool exact() const noexcept;
  std::size_t distinct_columns() const noexcept { return models_.size(); }

  double min_expected_dist2(std::span<const double> y) const;
  double min_expected_dist2(const Vector& y) const {
    return min_expected_dist2(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  }
  /// d_A(y, Z^n): square root of min_expected_dist2.
  double d_A(const Vector& y) const { return std::sqrt(min_expected_dist2(y)); }

 private:
  std::size_t dim_;
  std::vector<SymmetrizedColumn> models_;
};

/// d_A(x, Z^n) = min_i sqrt(E dist^2(x * Xbar_i, Z^n)) over all columns i of
/// the profile. Exact for finite-support laws, Monte Carlo otherwise.
double d_A_estimate(const Vector& x, const ensembles::EntryProfile& profile, std::size_t mc_trials,
                    RandomStream& stream);

struct RLCDParams {
  double L = 1.0;
  double alpha = 0.5;
  double radius_cap = 10.0;
  /// Grid spacing, and shell spacing unless shell_step is set.
  double resolution = 1e-2;
  std::size_t mc_trials = 1000;
  /// Random unit directions per shell (dimension >= 2); 0 means 32 * m.
  std::size_t directions_per_shell = 0;
  /// Radial step between random-direction shells; 0 means resolution.
  double shell_step = 0.0;
  /// Evaluation budget for the exhaustive grid phase (dimension >= 2).
  std::size_t grid_budget = 200000;
  bool record_trace = false;

  void validate() const;
};

struct RLCDTraceRow {
  double radius;
  double lhs;
  double rhs;
  bool witness;
};

/// Certified interval [lower, upper] for the RLCD infimum at the search's
/// resolution. upper is +inf when no witness was found below radius_cap.
struct RLCDEstimate {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  std::optional<Vector> witness;  // theta with ||theta|| == upper
  double analytic_floor = 0.0;    // L / (alpha ||V||)
  bool exhausted_below_floor = false;
  bool exact_expectation = true;
  std::size_t evaluations = 0;
  std::vector<RLCDTraceRow> trace;
};

/// Searches theta in R^m (m = basis.rows()) for the smallest ||theta|| with
///   min_j E dist^2(V^T theta * Xbar_j, Z^n) < L^2 log_+(alpha ||V^T theta|| / L).
/// No theta with ||theta|| <= L/(alpha ||V||) can qualify, so the search
/// starts there. m = 1 scans +-r on a grid of the given resolution. For
/// m >= 2 an exhaustive grid over a ball (bounded by grid_budget) is
/// followed by shells of axis and random directions; only the grid phase
/// raises `lower`.
RLCDEstimate rlcd_estimate(const Matrix& basis, const LatticeDistanceModel& model, const RLCDParams& params,
                           RandomStream& stream);

/// Convenience overload building the model from the given profile columns.
RLCDEstimate rlcd_estimate(const Matrix& basis, const ensembles::EntryProfile& profile,
                           const std::vector<std::size_t>& columns, const RLCDParams& params, RandomStream& stream);

/// Samples of a random vector in R^dim, stored coordinate-major for the
/// ball-count kernel.
struct LevySamples {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<double> coords;  // coords[c * count + p]

  Vector point(std::size_t p) const;
};

using VectorSampler = std::function<void(RandomStream&, std::span<double>)>;

LevySamples draw_levy_samples(const VectorSampler& sampler, std::size_t dim, std::size_t count, RandomStream& stream);

/// Candidate centres for approximating sup_y P(||X - y|| <= t).
struct CenterMenu {
  bool origin = true;
  bool median = true;
  /// Number of observed sample points tried as centres (the first ones).
  std::size_t observed = 64;
};

struct LevyEstimate {
  double probability;
  double stderr;
  Vector center;
};

/// Best empirical ball mass over the centre menu. The menu does not depend
/// on t, so for fixed samples the result is non-decreasing in t.
LevyEstimate levy_from_samples(const LevySamples& samples, double t, const CenterMenu& menu = {});

LevyEstimate levy_estimate(const VectorSampler& sampler, std::size_t dim, double t, std::size_t mc_trials,
                           RandomStream& stream, const CenterMenu& menu = {});

/// (C L / (alpha sqrt m))^m / det_root * (t + sqrt(m) / rd)^m; rd may be
/// +inf. Throws DomainError for m = 0 or det_root <= 0.
double esseen_bound_eval(std::size_t m, double L, double alpha, double det_root, double rd, double t, double C);

struct LatticeCount {
  std::size_t exact;
  double bound;  // (2 + C R / sqrt(n))^n
};

/// |Z^n intersect B(0, R)| by enumeration of [-ceil R, ceil R]^n. Throws
/// ResourceError outside n in {1..4}, R <= 20.
LatticeCount count_lattice_points(std::size_t n, double R, double C);

}  // namespace rankprobe::arithmetic
