#include "rankprobe/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "rankprobe/errors.hpp"
#include "rankprobe/kernels/kernels.hpp"
#include "rankprobe/linalg.hpp"

namespace rankprobe::arithmetic {

namespace {

constexpr std::size_t kMaxEvaluations = 50'000'000;

struct FoldedAtom {
  double magnitude;
  double weight;
};

// |a| > 0 atoms of X - X', merged. dist^2(y a, Z) is even in a and vanishes
// at a = 0, so nothing else contributes.
std::optional<std::vector<FoldedAtom>> folded_support(const ensembles::DistributionLaw& law) {
  const auto sym = law.symmetrized_support();
  if (!sym) return std::nullopt;
  std::vector<FoldedAtom> folded;
  for (const auto& atom : *sym) {
    const double mag = std::abs(atom.value);
    if (mag <= 1e-14) continue;
    folded.push_back({mag, atom.weight});
  }
  std::sort(folded.begin(), folded.end(), [](const auto& a, const auto& b) { return a.magnitude < b.magnitude; });
  std::vector<FoldedAtom> merged;
  for (const auto& f : folded) {
    if (!merged.empty() && std::abs(merged.back().magnitude - f.magnitude) <= 1e-12 * std::max(1.0, f.magnitude)) {
      merged.back().weight += f.weight;
    } else {
      merged.push_back(f);
    }
  }
  return merged;
}

double volume_unit_ball(std::size_t m) {
  const double half = static_cast<double>(m) / 2.0;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

}  // namespace

double dist_to_lattice(std::span<const double> y) { return std::sqrt(kernels::lattice_dist2(y)); }

Vector schur_product(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DomainError("schur_product: length mismatch");
  return x.cwiseProduct(y);
}

SymmetrizedColumn::SymmetrizedColumn(const ensembles::EntryProfile& profile, std::size_t column,
                                     std::size_t mc_trials, RandomStream& stream)
    : dim_(profile.rows()) {
  if (column >= profile.cols()) throw DomainError("SymmetrizedColumn: column index out of range");

  std::vector<std::vector<FoldedAtom>> per_coord(dim_);
  for (std::size_t i = 0; i < dim_ && exact_; ++i) {
    auto folded = folded_support(profile.law(i, column));
    if (!folded || folded->size() > kMaxExactAtoms) {
      exact_ = false;
    } else {
      per_coord[i] = std::move(*folded);
    }
  }

  if (exact_) {
    for (const auto& c : per_coord) rows_ = std::max(rows_, c.size());
    rows_ = std::max<std::size_t>(rows_, 1);
    atoms_.assign(rows_ * dim_, 0.0);
    weights_.assign(rows_ * dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t r = 0; r < per_coord[i].size(); ++r) {
        atoms_[r * dim_ + i] = per_coord[i][r].magnitude;
        weights_[r * dim_ + i] = per_coord[i][r].weight;
      }
    }
    return;
  }

  if (mc_trials == 0) throw DomainError("SymmetrizedColumn: continuous law needs mc_trials >= 1");
  rows_ = mc_trials;
  atoms_.resize(rows_ * dim_);
  weights_.assign(rows_ * dim_, 1.0 / static_cast<double>(mc_trials));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t i = 0; i < dim_; ++i) {
      atoms_[r * dim_ + i] = ensembles::sample_symmetrized(profile.law(i, column), stream);
    }
  }
}

double SymmetrizedColumn::expected_dist2(std::span<const double> y) const {
  if (y.size() != dim_) throw DomainError("expected_dist2: vector length does not match column length");
  const auto& k = kernels::table(kernels::active_backend());
  double total = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    total += k.weighted_scaled_lattice_dist2(y.data(), atoms_.data() + r * dim_, weights_.data() + r * dim_, dim_);
  }
  return total;
}

LatticeDistanceModel::LatticeDistanceModel(const ensembles::EntryProfile& profile,
                                           const std::vector<std::size_t>& columns, std::size_t mc_trials,
                                           RandomStream& stream)
    : dim_(profile.rows()) {
  if (columns.empty()) throw DomainError("LatticeDistanceModel: empty column set");
  std::map<std::vector<std::size_t>, bool> seen;
  for (std::size_t j : columns) {
    if (j >= profile.cols()) throw DomainError("LatticeDistanceModel: column index out of range");
    std::vector<std::size_t> signature(dim_);
    for (std::size_t i = 0; i < dim_; ++i) signature[i] = profile.law_index(i, j);
    if (!seen.emplace(std::move(signature), true).second) continue;
    models_.emplace_back(profile, j, mc_trials, stream);
  }
}

namespace {
std::vector<std::size_t> all_columns(std::size_t n) {
  std::vector<std::size_t> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = j;
  return cols;
}
}  // namespace

LatticeDistanceModel::LatticeDistanceModel(const ensembles::EntryProfile& profile, std::size_t mc_trials,
                                           RandomStream& stream)
    : LatticeDistanceModel(profile, all_columns(profile.cols()), mc_trials, stream) {}

bool LatticeDistanceModel::exact() const noexcept {
  return std::all_of(models_.begin(), models_.end(), [](const auto& m) { return m.exact(); });
}

double LatticeDistanceModel::min_expected_dist2(std::span<const double> y) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : models_) best = std::min(best, m.expected_dist2(y));
  return best;
}

double d_A_estimate(const Vector& x, const ensembles::EntryProfile& profile, std::size_t mc_trials,
                    RandomStream& stream) {
  if (static_cast<std::size_t>(x.size()) != profile.rows()) {
    throw DomainError("d_A_estimate: vector length must equal the number of matrix rows");
  }
  if (!x.allFinite()) throw InputError("d_A_estimate: non-finite vector");
  LatticeDistanceModel model(profile, mc_trials, stream);
  return model.d_A(x);
}

void RLCDParams::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("RLCD: L must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("RLCD: alpha must lie in (0, 1)");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ConfigError("RLCD: resolution must be positive");
  if (!(radius_cap > resolution) || !std::isfinite(radius_cap)) {
    throw ConfigError("RLCD: radius_cap must be finite and exceed resolution");
  }
  if (shell_step < 0.0 || !std::isfinite(shell_step)) throw ConfigError("RLCD: shell_step must be >= 0");
  if (mc_trials < 100) throw ConfigError("RLCD: mc_trials must be at least 100");
}

namespace {

class WitnessTest {
 public:
  WitnessTest(const Matrix& basis, const LatticeDistanceModel& model, const RLCDParams& params, RLCDEstimate& out)
      : basis_(basis), model_(model), params_(params), out_(out), y_(basis.cols()) {}

  bool operator()(const Vector& theta) {
    if (++out_.evaluations > kMaxEvaluations) {
      throw ResourceError("rlcd_estimate: evaluation budget exceeded; raise resolution or lower radius_cap");
    }
    y_.noalias() = basis_.transpose() * theta;
    const double lhs = model_.min_expected_dist2(y_);
    const double rhs = params_.L * params_.L * log_plus(params_.alpha * y_.norm() / params_.L);
    const bool witness = lhs < rhs;
    if (params_.record_trace) out_.trace.push_back({theta.norm(), lhs, rhs, witness});
    return witness;
  }

 private:
  const Matrix& basis_;
  const LatticeDistanceModel& model_;
  const RLCDParams& params_;
  RLCDEstimate& out_;
  Vector y_;
};

void search_line(const RLCDParams& params, WitnessTest& test, RLCDEstimate& out) {
  const double floor = out.analytic_floor;
  Vector theta(1);
  double cleared = floor;
  for (std::size_t j = 0;; ++j) {
    const double r = floor + static_cast<double>(j) * params.resolution;
    if (r > params.radius_cap) break;
    for (double sign : {1.0, -1.0}) {
      theta(0) = sign * r;
      if (test(theta)) {
        out.lower = cleared;
        out.upper = r;
        out.witness = theta;
        return;
      }
    }
    cleared = r;
  }
  out.lower = cleared;
}

// Exhaustive grid over floor < ||theta|| <= R. Returns the radius cleared.
double search_grid(std::size_t m, const RLCDParams& params, WitnessTest& test, RLCDEstimate& out) {
  const double floor = out.analytic_floor;
  const double res = params.resolution;
  const double target = std::pow(std::pow(floor, static_cast<double>(m)) +
                                     static_cast<double>(params.grid_budget) * std::pow(res, static_cast<double>(m)) /
                                         volume_unit_ball(m),
                                 1.0 / static_cast<double>(m));
  const double R = std::min(params.radius_cap, target);
  const double half = std::ceil(R / res);
  const double side = 2.0 * half + 1.0;
  if (!(std::pow(side, static_cast<double>(m)) <= 8.0 * static_cast<double>(params.grid_budget) + 1.0)) return floor;

  const auto G = static_cast<long>(half);
  std::vector<long> idx(m, -G);
  std::vector<std::pair<double, std::vector<long>>> points;
  const double floor2 = floor * floor;
  const double R2 = R * R;
  for (;;) {
    double n2 = 0.0;
    for (long v : idx) n2 += static_cast<double>(v) * static_cast<double>(v);
    n2 *= res * res;
    if (n2 > floor2 && n2 <= R2) points.emplace_back(n2, idx);
    std::size_t c = 0;
    while (c < m && idx[c] == G) idx[c++] = -G;
    if (c == m) break;
    ++idx[c];
  }
  std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  Vector theta(static_cast<Eigen::Index>(m));
  double cleared = floor;
  double last = floor;
  for (const auto& [n2, g] : points) {
    const double norm = std::sqrt(n2);
    if (norm > last) {
      cleared = last;
      last = norm;
    }
    for (std::size_t c = 0; c < m; ++c) theta(static_cast<Eigen::Index>(c)) = res * static_cast<double>(g[c]);
    if (test(theta)) {
      out.lower = cleared;
      out.upper = norm;
      out.witness = theta;
      return norm;
    }
  }
  return std::max(floor, R);
}

void search_shells(std::size_t m, double start, const RLCDParams& params, WitnessTest& test, RLCDEstimate& out,
                   RandomStream& stream) {
  const double step = params.shell_step > 0.0 ? params.shell_step : params.resolution;
  const std::size_t random_dirs = params.directions_per_shell > 0 ? params.directions_per_shell : 32 * m;
  const auto M = static_cast<Eigen::Index>(m);
  Vector dir(M);
  for (std::size_t j = 1;; ++j) {
    const double r = start + static_cast<double>(j) * step;
    if (r > params.radius_cap) return;
    for (Eigen::Index c = 0; c < M; ++c) {
      for (double sign : {1.0, -1.0}) {
        dir.setZero();
        dir(c) = sign * r;
        if (test(dir)) {
          out.upper = r;
          out.witness = dir;
          return;
        }
      }
    }
    for (std::size_t d = 0; d < random_dirs; ++d) {
      for (Eigen::Index c = 0; c < M; ++c) dir(c) = stream.normal();
      const double nd = dir.norm();
      if (nd == 0.0) continue;
      dir *= r / nd;
      if (test(dir)) {
        out.upper = r;
        out.witness = dir;
        return;
      }
    }
  }
}

}  // namespace

RLCDEstimate rlcd_estimate(const Matrix& basis, const LatticeDistanceModel& model, const RLCDParams& params,
                           RandomStream& stream) {
  params.validate();
  if (basis.rows() == 0) throw DomainError("rlcd_estimate: empty basis");
  if (static_cast<std::size_t>(basis.cols()) != model.dim()) {
    throw DomainError("rlcd_estimate: basis width must equal the column length of the law source");
  }
  linalg::require_finite(basis, "rlcd_estimate");
  const double op = linalg::singular_spectrum(basis).largest();
  if (!(op > 0.0)) throw DegenerateInstanceError("rlcd_estimate: basis is zero");

  RLCDEstimate out;
  out.analytic_floor = params.L / (params.alpha * op);
  out.exact_expectation = model.exact();
  if (params.radius_cap < out.analytic_floor) {
    out.lower = params.radius_cap;
    out.exhausted_below_floor = true;
    return out;
  }

  WitnessTest test(basis, model, params, out);
  const auto m = static_cast<std::size_t>(basis.rows());
  if (m == 1) {
    search_line(params, test, out);
    return out;
  }
  const double cleared = search_grid(m, params, test, out);
  if (out.witness) return out;
  out.lower = cleared;
  search_shells(m, cleared, params, test, out, stream);
  return out;
}

RLCDEstimate rlcd_estimate(const Matrix& basis, const ensembles::EntryProfile& profile,
                           const std::vector<std::size_t>& columns, const RLCDParams& params, RandomStream& stream) {
  params.validate();
  LatticeDistanceModel model(profile, columns, params.mc_trials, stream);
  return rlcd_estimate(basis, model, params, stream);
}

Vector LevySamples::point(std::size_t p) const {
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) v(static_cast<Eigen::Index>(c)) = coords[c * count + p];
  return v;
}

LevySamples draw_levy_samples(const VectorSampler& sampler, std::size_t dim, std::size_t count, RandomStream& stream) {
  if (dim == 0 || count == 0) throw DomainError("draw_levy_samples: dimension and count must be positive");
  LevySamples s;
  s.dim = dim;
  s.count = count;
  s.coords.resize(dim * count);
  std::vector<double> buf(dim);
  for (std::size_t p = 0; p < count; ++p) {
    sampler(stream, buf);
    for (std::size_t c = 0; c < dim; ++c) {
      if (!std::isfinite(buf[c])) throw InputError("draw_levy_samples: sampler produced a non-finite value");
      s.coords[c * count + p] = buf[c];
    }
  }
  return s;
}

LevyEstimate levy_from_samples(const LevySamples& samples, double t, const CenterMenu& menu) {
  if (samples.count == 0 || samples.dim == 0) throw DomainError("levy_from_samples: no samples");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("levy_from_samples: t must be finite and >= 0");

  const std::size_t n = samples.count;
  const std::size_t d = samples.dim;
  std::vector<Vector> centers;
  if (menu.origin) centers.push_back(Vector::Zero(static_cast<Eigen::Index>(d)));
  if (menu.median) {
    Vector med(static_cast<Eigen::Index>(d));
    std::vector<double> col;
    for (std::size_t c = 0; c < d; ++c) {
      col.assign(samples.coords.begin() + static_cast<std::ptrdiff_t>(c * n),
                 samples.coords.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
      auto mid = col.begin() + static_cast<std::ptrdiff_t>(n / 2);
      std::nth_element(col.begin(), mid, col.end());
      med(static_cast<Eigen::Index>(c)) = *mid;
    }
    centers.push_back(std::move(med));
  }
  for (std::size_t p = 0; p < std::min(menu.observed, n); ++p) centers.push_back(samples.point(p));
  if (centers.empty()) throw DomainError("levy_from_samples: empty centre menu");

  std::size_t best = 0;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const std::size_t hits = kernels::ball_count(samples.coords, n, d,
                                                 {centers[i].data(), static_cast<std::size_t>(centers[i].size())}, t * t);
    if (hits > best) {
      best = hits;
      best_index = i;
    }
  }
  const double p = static_cast<double>(best) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), centers[best_index]};
}

LevyEstimate levy_estimate(const VectorSampler& sampler, std::size_t dim, double t, std::size_t mc_trials,
                           RandomStream& stream, const CenterMenu& menu) {
  return levy_from_samples(draw_levy_samples(sampler, dim, mc_trials, stream), t, menu);
}

double esseen_bound_eval(std::size_t m, double L, double alpha, double det_root, double rd, double t, double C) {
  if (m == 0) throw DomainError("esseen_bound_eval: m must be positive");
  if (!(det_root > 0.0)) throw DomainError("esseen_bound_eval: det(VV^T)^{1/2} must be positive");
  if (!(L > 0.0) || !(alpha > 0.0) || !(C > 0.0)) throw DomainError("esseen_bound_eval: L, alpha, C must be positive");
  if (!(t >= 0.0)) throw DomainError("esseen_bound_eval: t must be >= 0");
  if (!(rd > 0.0)) throw DomainError("esseen_bound_eval: RLCD must be positive");
  const double md = static_cast<double>(m);
  const double sm = std::sqrt(md);
  return std::pow(C * L / (alpha * sm), md) / det_root * std::pow(t + sm / rd, md);
}

LatticeCount count_lattice_points(std::size_t n, double R, double C) {
  if (!(R >= 0.0) || !std::isfinite(R)) throw DomainError("count_lattice_points: R must be finite and >= 0");
  if (n < 1 || n > 4 || R > 20.0) {
    throw ResourceError("count_lattice_points: enumeration limited to n in 1..4 and R <= 20");
  }
  const auto G = static_cast<long>(std::ceil(R));
  const double limit = R * R + 1e-9;
  std::vector<long> idx(n, -G);
  std::size_t count = 0;
  for (;;) {
    double n2 = 0.0;
    for (long v : idx) n2 += static_cast<double>(v * v);
    if (n2 <= limit) ++count;
    std::size_t c = 0;
    while (c < n && idx[c] == G) idx[c++] = -G;
    if (c == n) break;
    ++idx[c];
  }
  const double nd = static_cast<double>(n);
  return {count, std::pow(2.0 + C * R / std::sqrt(nd), nd)};
}

}  // namespace rankprobe::arithmetic
