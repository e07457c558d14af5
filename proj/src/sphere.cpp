#include "rankprobe/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankprobe/errors.hpp"
#include "rankprobe/linalg.hpp"

namespace rankprobe::sphere {

void SphereParams::validate() const {
  const auto inside = [](double v) { return v > 0.0 && v < 1.0; };
  if (!inside(delta) || !inside(rho) || !inside(nu) || !inside(tau)) {
    throw ConfigError("sphere parameters must all lie strictly inside (0, 1)");
  }
}

std::size_t sparse_count(std::size_t n, double delta) {
  // Guard against products like 0.29 * 100 = 28.999999999999996.
  return static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) + 1e-9));
}

double dist_to_sparse(const Vector& x, double delta) {
  const auto n = static_cast<std::size_t>(x.size());
  if (n == 0) throw DomainError("dist_to_sparse: empty vector");
  const std::size_t drop = std::min(sparse_count(n, delta), n);
  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(x(static_cast<Eigen::Index>(i)));
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(drop), mags.end(), std::greater<>());
  double acc = 0.0;
  for (std::size_t i = drop; i < n; ++i) acc += mags[i] * mags[i];
  return std::sqrt(acc);
}

VectorClass classify_vector(const Vector& x, double delta, double rho) {
  if (std::abs(x.norm() - 1.0) > 1e-8) throw DomainError("classify_vector: input is not a unit vector");
  return dist_to_sparse(x, delta) <= rho ? VectorClass::compressible : VectorClass::incompressible;
}

SpreadResult spread_coordinates(const Vector& u, double delta, double rho) {
  const auto n = static_cast<double>(u.size());
  const double lo = rho / std::sqrt(2.0 * n);
  const double hi = 1.0 / std::sqrt(delta * n);
  SpreadResult out;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u(i));
    if (a >= lo && a <= hi) out.indices.push_back(static_cast<std::size_t>(i));
  }
  out.pass = static_cast<double>(out.indices.size()) >= rho * rho * delta * n / 2.0;
  return out;
}

AlmostOrthogonalResult almost_orthogonal_check(const Matrix& tuple, double nu) {
  if (tuple.cols() > tuple.rows()) throw DomainError("almost_orthogonal_check: more vectors than dimensions");
  Matrix normalized = tuple;
  for (Eigen::Index j = 0; j < tuple.cols(); ++j) {
    const double norm = tuple.col(j).norm();
    if (norm == 0.0) throw DomainError("almost_orthogonal_check: zero vector in tuple");
    normalized.col(j) /= norm;
  }
  const auto spectrum = linalg::singular_spectrum(normalized);
  const double s_max = spectrum.largest();
  const double s_min = spectrum.smallest();
  return {1.0 - nu <= s_min && s_max <= 1.0 + nu, s_min, s_max};
}

SpanSampleResult sample_span_incompressible(const Matrix& columns, double delta, double rho, std::size_t samples,
                                            RandomStream& stream) {
  SpanSampleResult out{true, std::numeric_limits<double>::infinity(), 0};
  const auto consider = [&](const Vector& v) {
    const double norm = v.norm();
    if (norm == 0.0) return;
    const double d = dist_to_sparse(v / norm, delta);
    out.min_dist = std::min(out.min_dist, d);
    if (d <= rho) out.all_incompressible = false;
    ++out.samples;
  };
  for (Eigen::Index j = 0; j < columns.cols(); ++j) consider(columns.col(j));
  Vector theta(columns.cols());
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = stream.normal();
    consider(columns * theta);
  }
  return out;
}

}  // namespace rankprobe::sphere
