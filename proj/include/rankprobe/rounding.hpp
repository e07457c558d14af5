#pragma once

// Randomized rounding of vectors and vector tuples onto the grid delta Z^n,
// a checker for the guarantees the rounded tuple should satisfy, membership
// in the net N_d, and uniform sampling of lattice shells.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rankprobe/ensembles.hpp"
#include "rankprobe/random.hpp"
#include "rankprobe/types.hpp"

namespace rankprobe::rounding {

/// Rounded vector plus the integers k_i with u_i = k_i * delta.
struct RoundedVector {
  Vector u;
  std::vector<std::int64_t> k;
};

/// Rounds each v_i to floor(v_i/delta)*delta, then adds delta with
/// probability (v_i - floor)/delta, so E u_i = v_i and |u_i - v_i| <= delta.
/// Coordinates already on the grid (within 1e-12 relative) stay put.
/// Throws DomainError for delta <= 0 or non-finite input.
RoundedVector randomized_round(const Vector& v, double delta, RandomStream& stream);

/// Column-wise randomized_round of an n x l tuple.
Matrix randomized_round_tuple(const Matrix& V, double delta, RandomStream& stream);

/// True if every coordinate is an integer multiple of delta within
/// 1e-12 * max(1, |u_i|/delta) grid units.
bool on_grid(const Vector& u, double delta);
bool on_grid(const Matrix& U, double delta);

struct RoundingParams {
  double delta = 0.01;
  double rho = 0.1;
  double tau = 0.5;
  /// Subgaussian constant used in the image-norm threshold 2 K delta n.
  double K = 1.0;
  double r = 0.1;
  /// Constant in the operator-norm threshold C_op delta sqrt(n).
  double C_op = 3.0;
  std::size_t span_samples = 1000;
  std::size_t annulus_samples = 1000;
  /// Monte Carlo size for d_A when the A laws are continuous.
  std::size_t mc_trials = 1000;

  void validate() const;
};

struct RoundingCheck {
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RoundingReport {
  RoundingCheck sup_norm;     // max_j ||u_j - v_j||_inf <= delta
  RoundingCheck op_norm;      // ||U - V|| <= C_op delta sqrt(n)
  RoundingCheck almost_orth;  // max deviation of singular values from 1 <= 1/4
  RoundingCheck incomp;       // min sampled span distance to sparse > tau^4/2
  RoundingCheck d_A;          // max_j d_A(u_j) < 2 rho sqrt(n)
  RoundingCheck annulus_d_A;  // min sampled d_A(U theta) > (rho/2) sqrt(n)
  RoundingCheck image_norm;   // max_j ||B u_j|| <= 2 K delta n
  /// Annulus samples that met ||U theta|| >= 8 r sqrt(n); zero means the
  /// condition was vacuous for this U.
  std::size_t annulus_hits = 0;

  bool sup_norm_ok() const { return sup_norm.pass; }
  bool op_norm_ok() const { return op_norm.pass; }
  bool almost_orth_ok() const { return almost_orth.pass; }
  bool incomp_ok() const { return incomp.pass; }
  bool d_A_ok() const { return d_A.pass; }
  bool annulus_d_A_ok() const { return annulus_d_A.pass; }
  bool image_norm_ok() const { return image_norm.pass; }
  bool all_pass() const;

  /// (name, check) in guarantee order.
  std::vector<std::pair<std::string, RoundingCheck>> rows() const;
};

/// Evaluates the seven guarantees for a rounded tuple U of V. `a_profile`
/// supplies the column laws d_A is defined through; `B` is a sampled
/// matrix with n columns. Throws DomainError on shape mismatch.
RoundingReport rounding_report(const Matrix& V, const Matrix& U, const ensembles::EntryProfile& a_profile,
                               const Matrix& B, const RoundingParams& params, RandomStream& stream);

/// Header `name,measured,threshold,pass` and one row per guarantee.
void write_report_csv(std::ostream& out, const RoundingReport& report);

struct NetParams {
  double delta = 0.01;
  double rho = 0.1;
  double tau = 0.5;
  std::size_t span_samples = 1000;
  std::size_t mc_trials = 1000;
};

/// Membership of an n x l grid tuple in N_d: ||u_j|| in [d_j/2, 4 d_j]
/// (inclusive), d_A(u_j) < 2 rho sqrt(n), and sampled incompressibility of
/// the span in Incomp(tau^2, tau^4/2). Throws DomainError for an off-grid
/// tuple or mismatched d.
bool is_in_N_d(const Matrix& U, const std::vector<double>& d, const ensembles::EntryProfile& a_profile,
               const NetParams& params, RandomStream& stream);

struct ShellParams {
  double tau = 0.5;
  std::size_t max_attempts = 10'000'000;
};

/// Uniform draw from { u in delta Z^n : ||u|| in [d/2, 4d],
/// u/||u|| in Incomp(tau^2, tau^4/2) } by rejection. Points are proposed
/// by rounding a uniform point of the ball of radius 4d + delta sqrt(n)/2
/// to the nearest grid point, which is uniform on grid points of B(0, 4d).
/// Throws DomainError unless d >= delta sqrt(n), ResourceError when no
/// point is accepted within max_attempts.
Vector sample_lattice_shell(double delta, double d, std::size_t n, const ShellParams& params, RandomStream& stream);

}  // namespace rankprobe::rounding
