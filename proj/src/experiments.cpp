#include "rankprobe/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rankprobe/errors.hpp"
#include "rankprobe/linalg.hpp"
#include "rankprobe/parallel.hpp"
#include "rankprobe/sphere.hpp"
#include "rankprobe/text.hpp"

namespace rankprobe::experiments {

namespace {

ensembles::EntryProfile square_profile(const ensembles::EntryProfile& p, std::size_t n) {
  if (p.rows() == n && p.cols() == n) return p;
  return p.resized(n, n);
}

double trial_tolerance(const ExperimentConfig& c, const linalg::SingularSpectrum& s) {
  return c.tol ? *c.tol : linalg::default_rank_tolerance(c.n, c.n, s);
}

TailEstimate binomial_estimate(std::size_t hits, std::size_t trials) {
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

void require_unit_columns(const Matrix& tuple, const char* what) {
  for (Eigen::Index j = 0; j < tuple.cols(); ++j) {
    if (std::abs(tuple.col(j).norm() - 1.0) > 1e-8) throw DomainError(std::string(what) + ": columns must be unit vectors");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (k > n) throw ConfigError("k must not exceed n");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(gamma > 0.0 && gamma < 0.5)) throw ConfigError("gamma must lie in (0, 1/2)");
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    if (!(epsilon_grid[i] >= 0.0) || !std::isfinite(epsilon_grid[i])) {
      throw ConfigError("epsilon values must be finite and non-negative");
    }
    if (i > 0 && !(epsilon_grid[i] > epsilon_grid[i - 1])) throw ConfigError("epsilon grid must be strictly ascending");
  }
  if (tol && (!(*tol >= 0.0) || !std::isfinite(*tol))) throw ConfigError("tol must be finite and non-negative");
}

std::vector<TrialRecord> collect_trials(const ExperimentConfig& config) {
  config.validate();
  const auto profile = square_profile(config.profile, config.n);
  std::vector<TrialRecord> out(config.trials);
  parallel_blocks(config.trials, config.threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto start = std::chrono::steady_clock::now();
      const std::uint64_t seed = derive_seed(config.master_seed, t);
      RandomStream stream(seed);
      const auto spectrum = linalg::singular_spectrum(ensembles::sample_matrix(profile, stream));
      const double tol = trial_tolerance(config, spectrum);
      TrialRecord r{};
      r.trial_index = t;
      r.derived_seed = seed;
      r.s_min = spectrum.smallest();
      r.s_k = config.k >= 1 ? spectrum.s(config.n - config.k + 1) : 0.0;
      r.s_max = spectrum.largest();
      r.rank_at_tol = linalg::numerical_rank(spectrum, tol);
      r.tol_used = tol;
      r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out[t] = r;
    }
  });
  return out;
}

std::size_t integer_rank(std::vector<std::int64_t> a, std::size_t rows, std::size_t cols) {
  if (a.size() != rows * cols) throw DomainError("integer_rank: entry count does not match shape");
  std::size_t rank = 0;
  std::int64_t prev = 1;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rows;
    for (std::size_t r = rank; r < rows; ++r) {
      if (a[r * cols + c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot == rows) continue;
    if (pivot != rank) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(a[pivot * cols + j], a[rank * cols + j]);
    }
    const std::int64_t p = a[rank * cols + c];
    for (std::size_t r = rank + 1; r < rows; ++r) {
      const std::int64_t f = a[r * cols + c];
      for (std::size_t j = c; j < cols; ++j) {
        // Bareiss step: the division is exact.
        a[r * cols + j] = (p * a[r * cols + j] - f * a[rank * cols + j]) / prev;
      }
    }
    prev = p;
    ++rank;
  }
  return rank;
}

Rational rank_tail_exact_rademacher(std::size_t n, std::size_t k) {
  if (n > 4) throw ResourceError("rank_tail_exact_rademacher: enumeration limited to n <= 4");
  if (n < 1 || k > n) throw DomainError("rank_tail_exact_rademacher: need n >= 1 and k <= n");
  const std::size_t cells = n * n;
  const std::uint64_t total = std::uint64_t{1} << cells;
  std::uint64_t hits = 0;
  std::vector<std::int64_t> entries(cells);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < cells; ++i) entries[i] = (mask >> i) & 1U ? -1 : 1;
    if (integer_rank(entries, n, n) + k <= n) ++hits;
  }
  const std::uint64_t g = std::gcd(hits, total);
  return {hits / g, total / g};
}

TailGrid tail_grid(const ExperimentConfig& config, const std::vector<std::size_t>& ks,
                   const std::vector<double>& epsilons) {
  config.validate();
  for (std::size_t k : ks) {
    if (k > config.n) throw ConfigError("tail_grid: k must not exceed n");
  }
  for (std::size_t i = 1; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > epsilons[i - 1])) throw ConfigError("tail_grid: epsilon grid must be strictly ascending");
  }
  const auto profile = square_profile(config.profile, config.n);
  const std::size_t K = ks.size();
  const std::size_t E = epsilons.size();
  const double sqrt_n = std::sqrt(static_cast<double>(config.n));
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(config.threads), config.trials));

  // Per worker: rank hits per k, then singular hits per (k, eps).
  std::vector<std::vector<std::size_t>> counts(workers, std::vector<std::size_t>(K + K * E, 0));
  parallel_blocks(config.trials, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
    auto& local = counts[w];
    for (std::size_t t = begin; t < end; ++t) {
      RandomStream stream(derive_seed(config.master_seed, t));
      const auto spectrum = linalg::singular_spectrum(ensembles::sample_matrix(profile, stream));
      const double tol = trial_tolerance(config, spectrum);
      const std::size_t rank = linalg::numerical_rank(spectrum, tol);
      for (std::size_t ki = 0; ki < K; ++ki) {
        const std::size_t k = ks[ki];
        if (rank + k <= config.n) ++local[ki];
        for (std::size_t ei = 0; ei < E; ++ei) {
          const bool hit = k == 0 || spectrum.s(config.n - k + 1) <= std::max(epsilons[ei] / sqrt_n, tol);
          if (hit) ++local[K + ki * E + ei];
        }
      }
    }
  });

  std::vector<std::size_t> total(K + K * E, 0);
  for (const auto& local : counts) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += local[i];
  }
  TailGrid grid{ks, epsilons, {}, std::vector<std::vector<TailEstimate>>(K)};
  for (std::size_t ki = 0; ki < K; ++ki) {
    grid.rank.push_back(binomial_estimate(total[ki], config.trials));
    for (std::size_t ei = 0; ei < E; ++ei) {
      grid.singular[ki].push_back(binomial_estimate(total[K + ki * E + ei], config.trials));
    }
  }
  return grid;
}

TailEstimate rank_tail_mc(const ExperimentConfig& config) { return tail_grid(config, {config.k}, {}).rank.front(); }

double singular_tail_comparison(double epsilon, std::size_t k, double gamma, double C) {
  if (k == 0) return 1.0;
  const double kd = static_cast<double>(k);
  return std::pow(C * epsilon / kd, gamma * kd * kd);
}

SingularTailTable singular_tail_mc(const ExperimentConfig& config, double comparison_C) {
  const auto grid = tail_grid(config, {config.k}, config.epsilon_grid);
  SingularTailTable table;
  for (std::size_t ei = 0; ei < config.epsilon_grid.size(); ++ei) {
    const double eps = config.epsilon_grid[ei];
    table.rows.push_back({eps, grid.singular[0][ei], singular_tail_comparison(eps, config.k, config.gamma, comparison_C)});
  }
  if (static_cast<double>(config.k) < std::log(static_cast<double>(config.n))) {
    table.warnings.push_back("k = " + std::to_string(config.k) + " is below ln n = " +
                             text::format_double(std::log(static_cast<double>(config.n))) +
                             "; the singular-value tail bound is not claimed in this regime");
  }
  return table;
}

TensorizationResult tensorization_check(std::size_t n, double t) {
  if (n < 1 || n > 20) throw DomainError("tensorization_check: n must lie in 1..20");
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("tensorization_check: t must lie in (0, 1]");
  const double x = static_cast<double>(n) * t;

  // Irwin-Hall CDF; evaluate on the short side of n/2 to keep the
  // alternating sum well conditioned.
  const auto cdf_low = [n](long double y) {
    long double sum = 0.0L;
    long double binom = 1.0L;
    for (std::size_t j = 0; static_cast<long double>(j) <= y && j <= n; ++j) {
      const long double term = binom * std::pow(y - static_cast<long double>(j), static_cast<long double>(n));
      sum += (j % 2 == 0) ? term : -term;
      binom = binom * static_cast<long double>(n - j) / static_cast<long double>(j + 1);
    }
    return sum / std::tgamma(static_cast<long double>(n) + 1.0L);
  };
  const long double half = static_cast<long double>(n) / 2.0L;
  long double p = x <= half ? cdf_low(x) : 1.0L - cdf_low(static_cast<long double>(n) - x);
  p = std::clamp(p, 0.0L, 1.0L);
  return {static_cast<double>(p), std::pow(std::numbers::e * t, static_cast<double>(n))};
}

std::vector<NormRow> norm_concentration_mc(const ensembles::EntryProfile& profile,
                                           const std::vector<std::size_t>& n_grid, std::size_t trials,
                                           double C_op, double C_hs, std::uint64_t master_seed, unsigned threads) {
  if (!profile.bounded_by_one()) throw DomainError("norm_concentration_mc: entries must satisfy |q| <= 1");
  if (trials < 1) throw DomainError("norm_concentration_mc: trials must be at least 1");
  std::vector<NormRow> rows;
  for (std::size_t n : n_grid) {
    if (n < 1) throw DomainError("norm_concentration_mc: n must be positive");
    const auto p = square_profile(profile, n);
    const std::uint64_t seed_n = derive_seed(master_seed, n);
    const double op_threshold = C_op * std::sqrt(static_cast<double>(n));
    const double hs_threshold = 2.0 * C_hs * static_cast<double>(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), trials));
    std::vector<std::size_t> op_hits(workers, 0);
    std::vector<std::size_t> hs_hits(workers, 0);
    parallel_blocks(trials, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
      for (std::size_t t = begin; t < end; ++t) {
        RandomStream stream(derive_seed(seed_n, t));
        const auto nm = linalg::norms(ensembles::sample_matrix(p, stream));
        if (nm.operator_norm >= op_threshold) ++op_hits[w];
        if (nm.hs_norm >= hs_threshold) ++hs_hits[w];
      }
    });
    const auto sum = [](const std::vector<std::size_t>& v) { return std::accumulate(v.begin(), v.end(), std::size_t{0}); };
    rows.push_back({n, binomial_estimate(sum(op_hits), trials), binomial_estimate(sum(hs_hits), trials)});
  }
  return rows;
}

bool compressible_event_check(const Matrix& B, const Matrix& tuple, double tau) {
  if (B.cols() != tuple.rows()) throw DomainError("compressible_event_check: B must have n columns");
  if (tuple.cols() == 0 || tuple.cols() > tuple.rows()) throw DomainError("compressible_event_check: need 1 <= l <= n");
  require_unit_columns(tuple, "compressible_event_check");
  if (!sphere::almost_orthogonal_check(tuple, 0.25).pass) return false;
  const double t2 = tau * tau;
  const double bound = tau * std::sqrt(static_cast<double>(tuple.rows()));
  for (Eigen::Index j = 0; j < tuple.cols(); ++j) {
    if (sphere::dist_to_sparse(tuple.col(j), t2) > t2 * t2) return false;
    if ((B * tuple.col(j)).norm() > bound) return false;
  }
  return true;
}

double compressible_event_search(const Matrix& B, std::size_t l, double tau, std::size_t tuples,
                                 RandomStream& stream) {
  const auto n = static_cast<std::size_t>(B.cols());
  if (tuples == 0 || l == 0 || l > n) throw DomainError("compressible_event_search: need tuples >= 1 and 1 <= l <= n");
  const std::size_t support = std::max<std::size_t>(1, sphere::sparse_count(n, tau * tau));
  std::vector<std::size_t> perm(n);
  std::size_t hits = 0;
  Matrix tuple(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
  for (std::size_t s = 0; s < tuples; ++s) {
    tuple.setZero();
    for (std::size_t j = 0; j < l; ++j) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t i = 0; i < support; ++i) {
        const auto pick = static_cast<std::size_t>(stream.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
        std::swap(perm[i], perm[pick]);
        tuple(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(j)) = stream.normal();
      }
      auto col = tuple.col(static_cast<Eigen::Index>(j));
      const double norm = col.norm();
      if (norm == 0.0) {
        col(static_cast<Eigen::Index>(perm[0])) = 1.0;
      } else {
        col /= norm;
      }
    }
    if (compressible_event_check(B, tuple, tau)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(tuples);
}

KernelEventFlags kernel_tuple_event_check(const Matrix& V, const Matrix& B, const ensembles::EntryProfile& a_profile,
                               const KernelEventParams& params, RandomStream& stream) {
  if (V.cols() == 0 || B.cols() != V.rows()) throw DomainError("kernel_tuple_event_check: shape mismatch");
  if (static_cast<std::size_t>(V.rows()) != a_profile.rows()) {
    throw DomainError("kernel_tuple_event_check: vector length must equal the rows of A");
  }
  linalg::require_finite(V, "kernel_tuple_event_check");
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    if ((B * V.col(j)).norm() > params.kernel_tol * std::max(1.0, V.col(j).norm())) {
      throw DomainError("kernel_tuple_event_check: tuple is not in the kernel of B");
    }
  }

  const double n = static_cast<double>(V.rows());
  const double sqrt_n = std::sqrt(n);
  const double t2 = params.tau * params.tau;
  KernelEventFlags f;

  const double R = std::exp(params.rho * params.rho * n / (4.0 * params.L * params.L));
  f.norm_window = true;
  bool zero_column = false;
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    const double norm = V.col(j).norm();
    zero_column = zero_column || norm == 0.0;
    f.norm_window = f.norm_window && norm >= 2.0 * params.r * sqrt_n && norm <= R;
  }
  if (!zero_column) {
    f.incompressible = sphere::sample_span_incompressible(V, t2, t2 * t2, params.span_samples, stream).all_incompressible;
    f.almost_orth = V.cols() <= V.rows() && sphere::almost_orthogonal_check(V, 0.125).pass;
  }

  const arithmetic::LatticeDistanceModel model(a_profile, params.mc_trials, stream);
  const double limit = params.rho * sqrt_n;
  f.d_A_small = true;
  for (Eigen::Index j = 0; j < V.cols(); ++j) f.d_A_small = f.d_A_small && model.d_A(V.col(j)) <= limit;

  f.annulus = true;
  const double theta_max = 1.0 / (20.0 * std::sqrt(static_cast<double>(V.cols())));
  const double image_min = 2.0 * params.r * sqrt_n;
  Vector dir(V.cols());
  for (std::size_t s = 0; s < params.annulus_samples && f.annulus; ++s) {
    for (Eigen::Index c = 0; c < dir.size(); ++c) dir(c) = stream.normal();
    const double dn = dir.norm();
    if (dn == 0.0) continue;
    dir /= dn;
    const double gain = (V * dir).norm();
    if (gain == 0.0 || image_min / gain > theta_max) continue;
    const double rmin = image_min / gain;
    const double radius = rmin + (theta_max - rmin) * stream.uniform();
    f.annulus = model.d_A(V * (radius * dir)) > limit;
  }
  return f;
}

KernelProbeResult kernel_rlcd_probe(const Matrix& A, const ensembles::EntryProfile& a_profile,
                                    const std::vector<std::size_t>& J, const arithmetic::RLCDParams& params,
                                    RandomStream& stream) {
  linalg::require_finite(A, "kernel_rlcd_probe");
  const auto n = static_cast<std::size_t>(A.cols());
  if (static_cast<std::size_t>(A.rows()) != n || a_profile.rows() != n || a_profile.cols() != n) {
    throw DomainError("kernel_rlcd_probe: A and its profile must be n x n");
  }
  if (J.size() >= n) throw DomainError("kernel_rlcd_probe: J must leave at least one column");
  std::vector<bool> in_J(n, false);
  Matrix selected(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(J.size()));
  for (std::size_t c = 0; c < J.size(); ++c) {
    if (J[c] >= n || in_J[J[c]]) throw DomainError("kernel_rlcd_probe: J has an out-of-range or repeated index");
    in_J[J[c]] = true;
    selected.col(static_cast<Eigen::Index>(c)) = A.col(static_cast<Eigen::Index>(J[c]));
  }
  const std::size_t k = n - J.size();
  const std::size_t m = (k + 1) / 2;

  const linalg::ComplementProjector proj(selected);
  KernelProbeResult result;
  result.complement_dim = proj.rank();
  result.subspace_dim = m;
  if (proj.rank() < m) {
    throw DegenerateInstanceError("kernel_rlcd_probe: complement has dimension " + std::to_string(proj.rank()) +
                                  " < " + std::to_string(m));
  }
  const Matrix basis = proj.complement_basis().leftCols(static_cast<Eigen::Index>(m)).transpose();
  std::vector<std::size_t> rest;
  for (std::size_t j = 0; j < n; ++j) {
    if (!in_J[j]) rest.push_back(j);
  }
  result.estimate = arithmetic::rlcd_estimate(basis, a_profile, rest, params, stream);
  return result;
}

ScalingFit scaling_fit(const std::vector<ScalingPoint>& points) {
  ScalingFit fit{0.0, {}, 0};
  double sxy = 0.0;
  double sxx = 0.0;
  std::vector<std::pair<double, double>> usable;
  for (const auto& p : points) {
    if (!(p.probability >= 0.0 && p.probability <= 1.0)) throw DomainError("scaling_fit: probability outside [0, 1]");
    if (p.probability == 0.0) {
      ++fit.excluded;
      continue;
    }
    const double x = static_cast<double>(p.k * p.n);
    const double y = -std::log(p.probability);
    usable.emplace_back(x, y);
    sxy += x * y;
    sxx += x * x;
  }
  if (usable.size() < 2) throw DomainError("scaling_fit: fewer than two usable points");
  if (!(sxx > 0.0)) throw DomainError("scaling_fit: every usable point has k n = 0");
  fit.c_hat = sxy / sxx;
  for (const auto& [x, y] : usable) fit.residuals.push_back(y - fit.c_hat * x);
  return fit;
}

SmallBallCurve small_ball_curve(const Vector& u, const ensembles::DistributionLaw& law,
                                const std::vector<double>& t_grid, std::size_t samples, RandomStream& stream) {
  if (u.size() == 0) throw DomainError("small_ball_curve: empty direction");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= t_grid[i - 1])) throw DomainError("small_ball_curve: t grid must be ascending");
  }
  const arithmetic::VectorSampler sampler = [&](RandomStream& s, std::span<double> out) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) acc += u(i) * ensembles::sample_entry(law, s);
    out[0] = acc;
  };
  const auto draws = arithmetic::draw_levy_samples(sampler, 1, samples, stream);
  SmallBallCurve curve{t_grid, {}, 0.0};
  for (double t : t_grid) curve.concentration.push_back(arithmetic::levy_from_samples(draws, t).probability);
  for (std::size_t i = 1; i < curve.concentration.size(); ++i) {
    curve.max_jump = std::max(curve.max_jump, curve.concentration[i] - curve.concentration[i - 1]);
  }
  return curve;
}

}  // namespace rankprobe::experiments
