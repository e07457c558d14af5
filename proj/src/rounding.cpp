#include "rankprobe/rounding.hpp"

#include <algorithm>
#include <cmath>

#include "rankprobe/arithmetic.hpp"
#include "rankprobe/errors.hpp"
#include "rankprobe/linalg.hpp"
#include "rankprobe/sphere.hpp"
#include "rankprobe/text.hpp"

namespace rankprobe::rounding {

namespace {

constexpr double kGridTol = 1e-12;

void require_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be finite and positive");
}

}  // namespace

RoundedVector randomized_round(const Vector& v, double delta, RandomStream& stream) {
  require_delta(delta);
  if (!v.allFinite()) throw DomainError("randomized_round: non-finite input");
  RoundedVector out{Vector(v.size()), std::vector<std::int64_t>(static_cast<std::size_t>(v.size()))};
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double q = v(i) / delta;
    const double nearest = std::nearbyint(q);
    double k;
    if (std::abs(q - nearest) <= kGridTol * std::max(1.0, std::abs(q))) {
      k = nearest;
    } else {
      k = std::floor(q);
      const double frac = q - k;
      if (stream.uniform() < frac) k += 1.0;
    }
    out.k[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(k);
    out.u(i) = k * delta;
  }
  return out;
}

Matrix randomized_round_tuple(const Matrix& V, double delta, RandomStream& stream) {
  Matrix U(V.rows(), V.cols());
  for (Eigen::Index j = 0; j < V.cols(); ++j) U.col(j) = randomized_round(V.col(j), delta, stream).u;
  return U;
}

bool on_grid(const Vector& u, double delta) {
  require_delta(delta);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double q = u(i) / delta;
    if (!std::isfinite(q)) return false;
    if (std::abs(q - std::nearbyint(q)) > kGridTol * std::max(1.0, std::abs(q))) return false;
  }
  return true;
}

bool on_grid(const Matrix& U, double delta) {
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    if (!on_grid(Vector(U.col(j)), delta)) return false;
  }
  return true;
}

void RoundingParams::validate() const {
  if (!(delta > 0.0) || !(rho > 0.0) || !(r > 0.0) || !(K > 0.0) || !(C_op > 0.0)) {
    throw ConfigError("rounding parameters delta, rho, r, K, C_op must be positive");
  }
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("rounding parameter tau must lie in (0, 1)");
}

bool RoundingReport::all_pass() const {
  for (const auto& [name, check] : rows()) {
    if (!check.pass) return false;
  }
  return true;
}

std::vector<std::pair<std::string, RoundingCheck>> RoundingReport::rows() const {
  return {{"sup_norm", sup_norm}, {"op_norm", op_norm},         {"almost_orth", almost_orth},
          {"incomp", incomp},     {"d_A", d_A},                 {"annulus_d_A", annulus_d_A},
          {"image_norm", image_norm}};
}

RoundingReport rounding_report(const Matrix& V, const Matrix& U, const ensembles::EntryProfile& a_profile,
                               const Matrix& B, const RoundingParams& params, RandomStream& stream) {
  params.validate();
  if (V.rows() != U.rows() || V.cols() != U.cols() || V.cols() == 0) {
    throw DomainError("rounding_report: V and U must have the same non-empty shape");
  }
  if (static_cast<std::size_t>(U.rows()) != a_profile.rows()) {
    throw DomainError("rounding_report: vector length must equal the rows of A");
  }
  if (B.cols() != U.rows()) throw DomainError("rounding_report: B must have n columns");
  linalg::require_finite(V, "rounding_report");
  linalg::require_finite(U, "rounding_report");
  linalg::require_finite(B, "rounding_report");

  const double n = static_cast<double>(U.rows());
  const double l = static_cast<double>(U.cols());
  const double sqrt_n = std::sqrt(n);
  RoundingReport rep;

  const Matrix diff = U - V;
  rep.sup_norm.measured = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
  rep.sup_norm.threshold = params.delta;
  rep.sup_norm.pass = rep.sup_norm.measured <= params.delta * (1.0 + kGridTol);

  rep.op_norm.measured = linalg::singular_spectrum(diff).largest();
  rep.op_norm.threshold = params.C_op * params.delta * sqrt_n;
  rep.op_norm.pass = rep.op_norm.measured <= rep.op_norm.threshold;

  rep.almost_orth.threshold = 0.25;
  bool zero_column = false;
  for (Eigen::Index j = 0; j < U.cols(); ++j) zero_column = zero_column || U.col(j).norm() == 0.0;
  if (zero_column || U.cols() > U.rows()) {
    rep.almost_orth.measured = 1.0;
    rep.almost_orth.pass = false;
  } else {
    const auto ao = sphere::almost_orthogonal_check(U, 0.25);
    rep.almost_orth.measured = std::max(1.0 - ao.s_min, ao.s_max - 1.0);
    rep.almost_orth.pass = ao.pass;
  }

  const double t2 = params.tau * params.tau;
  rep.incomp.threshold = t2 * t2 / 2.0;
  if (zero_column) {
    rep.incomp.measured = 0.0;
    rep.incomp.pass = false;
  } else {
    const auto span = sphere::sample_span_incompressible(U, t2, t2 * t2 / 2.0, params.span_samples, stream);
    rep.incomp.measured = span.min_dist;
    rep.incomp.pass = span.all_incompressible;
  }

  const arithmetic::LatticeDistanceModel model(a_profile, params.mc_trials, stream);
  rep.d_A.threshold = 2.0 * params.rho * sqrt_n;
  for (Eigen::Index j = 0; j < U.cols(); ++j) rep.d_A.measured = std::max(rep.d_A.measured, model.d_A(U.col(j)));
  rep.d_A.pass = rep.d_A.measured < rep.d_A.threshold;

  // theta with ||theta|| <= 1/(20 sqrt l) and ||U theta|| >= 8 r sqrt(n):
  // pick a direction, then a radius uniformly in the feasible interval.
  rep.annulus_d_A.threshold = params.rho / 2.0 * sqrt_n;
  rep.annulus_d_A.measured = std::numeric_limits<double>::infinity();
  const double theta_max = 1.0 / (20.0 * std::sqrt(l));
  const double image_min = 8.0 * params.r * sqrt_n;
  Vector dir(U.cols());
  for (std::size_t s = 0; s < params.annulus_samples; ++s) {
    for (Eigen::Index c = 0; c < dir.size(); ++c) dir(c) = stream.normal();
    const double dn = dir.norm();
    if (dn == 0.0) continue;
    dir /= dn;
    const double gain = (U * dir).norm();
    if (gain == 0.0) continue;
    const double rmin = image_min / gain;
    if (rmin > theta_max) continue;
    const double radius = rmin + (theta_max - rmin) * stream.uniform();
    const Vector y = U * (radius * dir);
    rep.annulus_d_A.measured = std::min(rep.annulus_d_A.measured, model.d_A(y));
    ++rep.annulus_hits;
  }
  rep.annulus_d_A.pass = rep.annulus_d_A.measured > rep.annulus_d_A.threshold;

  rep.image_norm.threshold = 2.0 * params.K * params.delta * n;
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    rep.image_norm.measured = std::max(rep.image_norm.measured, (B * U.col(j)).norm());
  }
  rep.image_norm.pass = rep.image_norm.measured <= rep.image_norm.threshold;
  return rep;
}

void write_report_csv(std::ostream& out, const RoundingReport& report) {
  out << "name,measured,threshold,pass\n";
  for (const auto& [name, check] : report.rows()) {
    out << name << ',' << text::format_double(check.measured) << ',' << text::format_double(check.threshold) << ','
        << (check.pass ? "true" : "false") << '\n';
  }
}

bool is_in_N_d(const Matrix& U, const std::vector<double>& d, const ensembles::EntryProfile& a_profile,
               const NetParams& params, RandomStream& stream) {
  require_delta(params.delta);
  if (d.size() != static_cast<std::size_t>(U.cols()) || U.cols() == 0) {
    throw DomainError("is_in_N_d: need one radius per column");
  }
  if (static_cast<std::size_t>(U.rows()) != a_profile.rows()) {
    throw DomainError("is_in_N_d: vector length must equal the rows of A");
  }
  if (!on_grid(U, params.delta)) throw DomainError("is_in_N_d: tuple is not on the delta grid");

  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    const double norm = U.col(j).norm();
    const double dj = d[static_cast<std::size_t>(j)];
    if (norm < dj / 2.0 || norm > 4.0 * dj) return false;
  }

  const double sqrt_n = std::sqrt(static_cast<double>(U.rows()));
  const arithmetic::LatticeDistanceModel model(a_profile, params.mc_trials, stream);
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    if (!(model.d_A(U.col(j)) < 2.0 * params.rho * sqrt_n)) return false;
  }

  const double t2 = params.tau * params.tau;
  return sphere::sample_span_incompressible(U, t2, t2 * t2 / 2.0, params.span_samples, stream).all_incompressible;
}

Vector sample_lattice_shell(double delta, double d, std::size_t n, const ShellParams& params, RandomStream& stream) {
  require_delta(delta);
  if (n == 0) throw DomainError("sample_lattice_shell: n must be positive");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  if (!(d >= delta * sqrt_n) || !std::isfinite(d)) throw DomainError("sample_lattice_shell: need d >= delta sqrt(n)");
  if (!(params.tau > 0.0 && params.tau < 1.0)) throw DomainError("sample_lattice_shell: tau must lie in (0, 1)");

  const double t2 = params.tau * params.tau;
  const double outer = 4.0 * d + delta * sqrt_n / 2.0;
  const auto N = static_cast<Eigen::Index>(n);
  Vector x(N);
  Vector u(N);
  for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
    for (Eigen::Index i = 0; i < N; ++i) x(i) = stream.normal();
    const double xn = x.norm();
    if (xn == 0.0) continue;
    const double radius = outer * std::pow(stream.uniform(), 1.0 / static_cast<double>(n));
    x *= radius / xn;
    for (Eigen::Index i = 0; i < N; ++i) u(i) = std::nearbyint(x(i) / delta) * delta;
    const double un = u.norm();
    if (un < d / 2.0 || un > 4.0 * d) continue;
    if (sphere::classify_vector(u / un, t2, t2 * t2 / 2.0) != sphere::VectorClass::incompressible) continue;
    return u;
  }
  throw ResourceError("sample_lattice_shell: no point accepted in " + std::to_string(params.max_attempts) +
                      " attempts (n = " + std::to_string(n) + ", delta = " + text::format_double(delta) +
                      ", d = " + text::format_double(d) + "); acceptance rate is below 1e-6 or the set is empty");
}

}  // namespace rankprobe::rounding
