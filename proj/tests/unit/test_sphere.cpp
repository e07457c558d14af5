#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankprobe/errors.hpp"
#include "rankprobe/random.hpp"
#include "rankprobe/sphere.hpp"

using namespace rankprobe;
using namespace rankprobe::sphere;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// min over supports S with |S| <= s of ||x restricted to complement of S||.
double brute_dist_to_sparse(const Vector& x, std::size_t s) {
  const auto n = static_cast<std::size_t>(x.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > s) continue;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1u)) acc += x(static_cast<Eigen::Index>(i)) * x(static_cast<Eigen::Index>(i));
    }
    best = std::min(best, std::sqrt(acc));
  }
  return best;
}

}  // namespace

TEST(SphereParams, Validation) {
  EXPECT_NO_THROW((SphereParams{0.1, 0.1, 0.5, 0.5}.validate()));
  EXPECT_THROW((SphereParams{0.0, 0.1, 0.5, 0.5}.validate()), ConfigError);
  EXPECT_THROW((SphereParams{0.1, 1.0, 0.5, 0.5}.validate()), ConfigError);
}

TEST(DistToSparse, Examples) {
  EXPECT_NEAR(dist_to_sparse(vec({1, 1, 1, 1}) / 2.0, 0.5), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(dist_to_sparse(vec({3, 4}) / 5.0, 0.5), 0.6, 1e-15);
  EXPECT_EQ(dist_to_sparse(vec({0, 2, 0, 0, 1}), 0.4), 0.0);
  EXPECT_NEAR(dist_to_sparse(vec({3, 4}), 0.2), 5.0, 1e-15);
}

TEST(DistToSparse, MatchesSupportEnumeration) {
  RandomStream s(1);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (double delta : {0.1, 0.25, 0.5, 0.9}) {
      for (int t = 0; t < 20; ++t) {
        Vector x(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = s.normal();
        EXPECT_NEAR(dist_to_sparse(x, delta), brute_dist_to_sparse(x, sparse_count(n, delta)), 1e-14);
      }
    }
  }
}

TEST(SparseCount, FloorIsRobustToRepresentation) {
  EXPECT_EQ(sparse_count(100, 0.29), 29u);
  EXPECT_EQ(sparse_count(10, 0.1), 1u);
  EXPECT_EQ(sparse_count(9, 0.1), 0u);
}

TEST(ClassifyVector, Examples) {
  EXPECT_EQ(classify_vector(Vector::Unit(10, 0), 0.1, 0.1), VectorClass::compressible);
  const Vector flat = Vector::Constant(100, 0.1);
  EXPECT_EQ(classify_vector(flat, 0.1, 0.1), VectorClass::incompressible);
  EXPECT_NEAR(dist_to_sparse(flat, 0.1), std::sqrt(0.9), 1e-14);
  // dist exactly rho: (3,4)/5 drops 0.8 leaving 0.6.
  EXPECT_EQ(classify_vector(vec({3, 4}) / 5.0, 0.5, 0.6), VectorClass::compressible);
  EXPECT_THROW(classify_vector(vec({1, 1}), 0.5, 0.1), DomainError);
}

TEST(Spread, Examples) {
  const std::size_t n = 16;
  const Vector flat = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / 4.0);
  for (double rho : {0.1, 0.5, 1.0}) {
    for (double delta : {0.25, 1.0}) {
      const auto r = spread_coordinates(flat, delta, rho);
      EXPECT_EQ(r.indices.size(), n);
      EXPECT_TRUE(r.pass);
    }
  }
  const auto e1 = spread_coordinates(Vector::Unit(4, 0), 0.25, 0.5);
  EXPECT_EQ(e1.indices, std::vector<std::size_t>{0});
}

TEST(Spread, IncompressibleVectorsAreSpread) {
  RandomStream s(2);
  const double delta = 0.2, rho = 0.3;
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    Vector x(60);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = s.normal();
    x.normalize();
    if (classify_vector(x, delta, rho) != VectorClass::incompressible) continue;
    ++checked;
    EXPECT_TRUE(spread_coordinates(x, delta, rho).pass);
  }
  EXPECT_GT(checked, 900);
}

TEST(AlmostOrthogonal, Examples) {
  const Matrix id = Matrix::Identity(4, 3);
  for (double nu : {0.01, 0.5}) {
    const auto r = almost_orthogonal_check(id, nu);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.s_min, 1.0, 1e-14);
    EXPECT_NEAR(r.s_max, 1.0, 1e-14);
  }
  Matrix rep(3, 2);
  rep.col(0) = vec({1, 2, 3});
  rep.col(1) = rep.col(0);
  const auto r = almost_orthogonal_check(rep, 0.5);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.s_min, 0.0, 1e-12);

  Matrix skew(2, 2);
  skew.col(0) = vec({1, 0});
  skew.col(1) = vec({1, 1}) / std::sqrt(2.0);
  const auto sk = almost_orthogonal_check(skew, 0.125);
  EXPECT_FALSE(sk.pass);
  EXPECT_NEAR(sk.s_max, std::sqrt(1.0 + 1.0 / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(sk.s_min, std::sqrt(1.0 - 1.0 / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(sk.s_max, 1.3066, 1e-4);
  EXPECT_NEAR(sk.s_min, 0.5412, 1e-4);

  Matrix zero = Matrix::Identity(3, 2);
  zero.col(1).setZero();
  EXPECT_THROW(almost_orthogonal_check(zero, 0.5), DomainError);
  EXPECT_THROW(almost_orthogonal_check(Matrix::Identity(2, 3), 0.5), DomainError);
}

TEST(AlmostOrthogonal, MonotoneInNu) {
  RandomStream s(3);
  for (int t = 0; t < 50; ++t) {
    Matrix m(8, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = s.normal();
    bool passed = false;
    for (double nu = 0.05; nu < 1.0; nu += 0.05) {
      const bool p = almost_orthogonal_check(m, nu).pass;
      if (passed) EXPECT_TRUE(p);
      passed = passed || p;
    }
  }
}

TEST(SpanSample, FlagsCompressibleSpans) {
  RandomStream s(4);
  Matrix sparse = Matrix::Zero(20, 2);
  sparse(0, 0) = 1.0;
  sparse(1, 1) = 1.0;
  EXPECT_FALSE(sample_span_incompressible(sparse, 0.1, 0.1, 100, s).all_incompressible);
  Matrix flat(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) {
    flat(i, 0) = 1.0;
    flat(i, 1) = i % 2 ? 1.0 : -1.0;
  }
  const auto r = sample_span_incompressible(flat, 0.1, 0.1, 200, s);
  EXPECT_TRUE(r.all_incompressible);
  EXPECT_GT(r.min_dist, 0.1);
}
