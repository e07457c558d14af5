#pragma once

// Monte Carlo probes of the rank and singular-value tails, exact oracles at
// toy scale, and event checkers for structured vector tuples.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rankprobe/arithmetic.hpp"
#include "rankprobe/ensembles.hpp"
#include "rankprobe/random.hpp"
#include "rankprobe/types.hpp"

namespace rankprobe::experiments {

struct ExperimentConfig {
  /// Entry laws; resized to n x n when trials run.
  ensembles::EntryProfile profile;
  std::size_t n = 1;
  std::size_t k = 1;
  std::vector<double> epsilon_grid;
  double gamma = 0.25;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  /// Absolute rank tolerance; nullopt uses the per-sample default
  /// max(n, n) * eps * s_1.
  std::optional<double> tol;
  unsigned threads = 1;

  /// Throws ConfigError unless 0 <= k <= n, n >= 1, trials >= 1, gamma in
  /// (0, 1/2), and epsilon_grid is ascending with non-negative entries.
  void validate() const;
};

struct TrialRecord {
  std::size_t trial_index;
  std::uint64_t derived_seed;
  double s_min;  // s_n
  double s_k;    // s_{n-k+1}
  double s_max;  // s_1
  std::size_t rank_at_tol;
  double tol_used;
  double runtime_seconds;

  /// Runtime is excluded: it is the only field that depends on the host.
  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    return a.trial_index == b.trial_index && a.derived_seed == b.derived_seed && a.s_min == b.s_min &&
           a.s_k == b.s_k && a.s_max == b.s_max && a.rank_at_tol == b.rank_at_tol && a.tol_used == b.tol_used;
  }
};

/// One record per trial, ordered by trial_index. Trial t samples from
/// RandomStream(derive_seed(master_seed, t)).
std::vector<TrialRecord> collect_trials(const ExperimentConfig& config);

struct Rational {
  std::uint64_t num;
  std::uint64_t den;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Exact rank of an integer matrix by fraction-free elimination.
std::size_t integer_rank(std::vector<std::int64_t> entries, std::size_t rows, std::size_t cols);

/// #{A in {+-1}^{n x n} : rank(A) <= n - k} / 2^{n^2}, reduced. Throws
/// ResourceError for n > 4, DomainError unless 1 <= n and k <= n.
Rational rank_tail_exact_rademacher(std::size_t n, std::size_t k);

struct TailEstimate {
  double estimate;
  double stderr;
  std::size_t trials;
};

/// Every estimate below comes from one set of trials: matrix t is drawn
/// once and tested against every k and epsilon, so the tables are
/// monotone exactly, not only in expectation.
struct TailGrid {
  std::vector<std::size_t> ks;
  std::vector<double> epsilons;
  std::vector<TailEstimate> rank;                  // rank[ki]: P(rank <= n - k)
  std::vector<std::vector<TailEstimate>> singular;  // singular[ki][ei]: P(s_{n-k+1} <= max(eps/sqrt(n), tol))
};

TailGrid tail_grid(const ExperimentConfig& config, const std::vector<std::size_t>& ks,
                   const std::vector<double>& epsilons);

/// P(numerical rank <= n - k) at config.tol.
TailEstimate rank_tail_mc(const ExperimentConfig& config);

struct SingularTailRow {
  double epsilon;
  TailEstimate tail;
  double comparison;  // (C eps / k)^{gamma k^2}
};

struct SingularTailTable {
  std::vector<SingularTailRow> rows;
  std::vector<std::string> warnings;
};

/// (C eps / k)^{gamma k^2}.
double singular_tail_comparison(double epsilon, std::size_t k, double gamma, double C);

/// Per epsilon, P(s_{n-k+1} <= max(eps/sqrt(n), tol)). The tolerance floor
/// makes the eps = 0 column coincide with rank_tail_mc on the same trials.
/// Warns when k < ln n.
SingularTailTable singular_tail_mc(const ExperimentConfig& config, double comparison_C = 1.0);

struct TensorizationResult {
  double probability;  // P(U_1 + ... + U_n <= n t), U_i uniform on [0, 1]
  double bound;        // (e t)^n
};

/// Exact Irwin-Hall distribution function at n t. Throws DomainError
/// unless 1 <= n <= 20 and 0 < t <= 1.
TensorizationResult tensorization_check(std::size_t n, double t);

struct NormRow {
  std::size_t n;
  TailEstimate op_exceed;  // P(||Q|| >= C_op sqrt(n))
  TailEstimate hs_exceed;  // P(||Q||_HS >= 2 C_hs n)
};

/// Throws DomainError unless every law is bounded by 1 in absolute value.
std::vector<NormRow> norm_concentration_mc(const ensembles::EntryProfile& profile,
                                           const std::vector<std::size_t>& n_grid, std::size_t trials,
                                           double C_op, double C_hs, std::uint64_t master_seed,
                                           unsigned threads = 1);

/// True iff the unit-vector tuple (n x l) is (1/4)-almost orthogonal, every
/// column lies in Comp(tau^2, tau^4), and every ||B x_j|| <= tau sqrt(n).
/// Throws DomainError on non-unit columns or shape mismatch.
bool compressible_event_check(const Matrix& B, const Matrix& tuple, double tau);

/// Fraction of `tuples` random tuples of l sparse unit vectors (support
/// floor(tau^2 n), Gaussian values) for which compressible_event_check holds.
double compressible_event_search(const Matrix& B, std::size_t l, double tau, std::size_t tuples,
                                 RandomStream& stream);

struct KernelEventParams {
  double tau = 0.5;
  double rho = 0.1;
  double r = 0.1;
  double L = 1.0;
  std::size_t span_samples = 1000;
  std::size_t annulus_samples = 1000;
  std::size_t mc_trials = 1000;
  double kernel_tol = 1e-8;
};

struct KernelEventFlags {
  bool norm_window = false;     // 2 r sqrt(n) <= ||v_j|| <= exp(rho^2 n / (4 L^2))
  bool incompressible = false;  // sampled span in Incomp(tau^2, tau^4)
  bool almost_orth = false;     // (1/8)-almost orthogonal
  bool d_A_small = false;       // d_A(v_j) <= rho sqrt(n)
  bool annulus = false;         // sampled d_A(V theta) > rho sqrt(n)
  bool all() const { return norm_window && incompressible && almost_orth && d_A_small && annulus; }
};

/// The annulus condition samples theta with ||theta|| <= 1/(20 sqrt l) and
/// ||V theta|| >= 2 r sqrt(n); when no such theta exists it holds vacuously.
/// Throws DomainError when ||B v_j|| > kernel_tol * max(1, ||v_j||).
KernelEventFlags kernel_tuple_event_check(const Matrix& V, const Matrix& B, const ensembles::EntryProfile& a_profile,
                               const KernelEventParams& params, RandomStream& stream);

struct KernelProbeResult {
  arithmetic::RLCDEstimate estimate;
  std::size_t complement_dim;
  std::size_t subspace_dim;  // ceil(k / 2)
};

/// E = span of the ceil(k/2) weakest directions of the complement of
/// span{A_j : j in J}, with k = n - |J|; the RLCD of E is estimated against
/// the laws of the columns outside J. Throws DegenerateInstanceError when
/// the complement is smaller than ceil(k/2).
KernelProbeResult kernel_rlcd_probe(const Matrix& A, const ensembles::EntryProfile& a_profile,
                                    const std::vector<std::size_t>& J, const arithmetic::RLCDParams& params,
                                    RandomStream& stream);

struct ScalingPoint {
  std::size_t n;
  std::size_t k;
  double probability;
};

struct ScalingFit {
  double c_hat;
  std::vector<double> residuals;  // -log p - c_hat k n, per usable point
  std::size_t excluded;           // points with p = 0
};

/// Least squares through the origin of -log p against k n. Points with
/// p = 0 are excluded and counted. Throws DomainError for p outside [0, 1]
/// or fewer than two usable points.
ScalingFit scaling_fit(const std::vector<ScalingPoint>& points);

struct SmallBallCurve {
  std::vector<double> t;
  std::vector<double> concentration;
  double max_jump;
};

/// Empirical Levy concentration of <u, xi>, xi with iid entries of `law`,
/// over an ascending t grid (shared samples and centres).
SmallBallCurve small_ball_curve(const Vector& u, const ensembles::DistributionLaw& law,
                                const std::vector<double>& t_grid, std::size_t samples, RandomStream& stream);

}  // namespace rankprobe::experiments
