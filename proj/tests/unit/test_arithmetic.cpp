#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rankprobe/arithmetic.hpp"
#include "rankprobe/errors.hpp"

using namespace rankprobe;
using namespace rankprobe::arithmetic;
using ensembles::DistributionLaw;
using ensembles::EntryProfile;

namespace {

double brute_lattice_dist(const Vector& y) {
  // Nearest lattice point searched coordinate-by-coordinate over +-2 of floor.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int d = -2; d <= 2; ++d) {
      const double m = std::floor(y(i)) + d;
      best = std::min(best, (y(i) - m) * (y(i) - m));
    }
    acc += best;
  }
  return std::sqrt(acc);
}

double nearest_dist2(double x) {
  const double r = x - std::nearbyint(x);
  return r * r;
}

// First grid point t > floor with lhs(t) < log_plus(alpha t / L), scanning
// with step h.
template <class F>
double scan_infimum(F lhs, double L, double alpha, double from, double to, double h) {
  for (double t = from; t <= to; t += h) {
    if (lhs(t) < L * L * log_plus(alpha * t / L)) return t;
  }
  return std::numeric_limits<double>::infinity();
}

EntryProfile rademacher(std::size_t rows, std::size_t cols) {
  return EntryProfile(rows, cols, DistributionLaw::rademacher(), 10.0);
}

}  // namespace

TEST(DistToLattice, Examples) {
  Vector ints(3);
  ints << 1, -4, 0;
  EXPECT_EQ(dist_to_lattice(ints), 0.0);
  EXPECT_DOUBLE_EQ(dist_to_lattice(Vector::Constant(4, 0.5)), 1.0);
}

TEST(DistToLattice, MatchesBruteForceAndIsPeriodic) {
  RandomStream s(1);
  for (int t = 0; t < 1000; ++t) {
    Vector y(1 + t % 5);
    Vector shift(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y(i) = 20.0 * (s.uniform() - 0.5);
      shift(i) = static_cast<double>(s.uniform_int(-5, 5));
    }
    EXPECT_NEAR(dist_to_lattice(y), brute_lattice_dist(y), 1e-12);
    EXPECT_NEAR(dist_to_lattice(Vector(y + shift)), dist_to_lattice(y), 1e-12);
  }
}

TEST(SchurProduct, Examples) {
  Vector x(2), y(2), want(2);
  x << 1, 2;
  y << 3, 4;
  want << 3, 8;
  EXPECT_EQ(schur_product(x, y), want);
  EXPECT_EQ(schur_product(x, Vector::Ones(2)), x);
  EXPECT_EQ(schur_product(x, Vector::Zero(2)), Vector::Zero(2));
  EXPECT_THROW(schur_product(x, Vector::Ones(3)), DomainError);
}

TEST(LogPlus, NaturalLogClampedAtZero) {
  EXPECT_EQ(log_plus(0.5), 0.0);
  EXPECT_EQ(log_plus(1.0), 0.0);
  EXPECT_DOUBLE_EQ(log_plus(std::exp(2.0)), 2.0);
}

TEST(DA, SmallExamples) {
  RandomStream s(2);
  const auto p1 = rademacher(1, 1);
  EXPECT_EQ(d_A_estimate(Vector::Zero(1), p1, 1000, s), 0.0);
  EXPECT_NEAR(d_A_estimate(Vector::Constant(1, 0.1), p1, 1000, s), std::sqrt(0.5 * 0.04), 1e-12);
  EXPECT_NEAR(d_A_estimate(Vector::Constant(1, 0.5), p1, 1000, s), 0.0, 1e-12);
  EXPECT_NEAR(d_A_estimate(Vector::Constant(3, 0.5), rademacher(3, 4), 1000, s), 0.0, 1e-12);
}

TEST(DA, ExactForFiniteSupportsAtAnyDimension) {
  RandomStream s(3);
  const auto p = rademacher(20, 3);
  const LatticeDistanceModel model(p, 1000, s);
  EXPECT_TRUE(model.exact());
  EXPECT_EQ(model.distinct_columns(), 1u);
  EXPECT_NEAR(model.d_A(Vector::Constant(20, 0.1)), std::sqrt(20 * 0.5 * 0.04), 1e-12);
}

TEST(DA, MixedLawsEnumerationOracle) {
  // Row 0 rademacher, row 1 sparse-bernoulli(1/4): enumerate X - X' per row.
  const std::vector<ensembles::LawRule> rules = {
      {std::nullopt, std::nullopt, DistributionLaw::rademacher()},
      {1, std::nullopt, DistributionLaw::sparse_bernoulli(0.25)},
  };
  const EntryProfile p(2, 1, rules, 10.0);
  RandomStream s(4);
  Vector x(2);
  x << 0.13, 0.41;
  double want = 0.0;
  for (double a : {-1.0, 1.0})
    for (double b : {-1.0, 1.0}) want += 0.25 * nearest_dist2(x(0) * (a - b));
  const double v = 2.0;  // 1/sqrt(0.25)
  const double sb[3] = {-v, 0.0, v};
  const double w[3] = {0.125, 0.75, 0.125};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) want += w[a] * w[b] * nearest_dist2(x(1) * (sb[a] - sb[b]));
  EXPECT_NEAR(d_A_estimate(x, p, 1000, s), std::sqrt(want), 1e-12);
}

TEST(DA, MonteCarloForGaussian) {
  // For |x| small, E dist^2(x (g - g')) = 2 x^2 up to an exponentially small tail.
  RandomStream s(5);
  const EntryProfile p(1, 2, DistributionLaw::gaussian(), 10.0);
  const LatticeDistanceModel model(p, 20000, s);
  EXPECT_FALSE(model.exact());
  EXPECT_NEAR(model.min_expected_dist2(Vector::Constant(1, 0.05)), 2 * 0.0025, 0.0025 * 0.2);
}

TEST(DA, Errors) {
  RandomStream s(6);
  const auto p = rademacher(2, 2);
  EXPECT_THROW(d_A_estimate(Vector::Zero(3), p, 1000, s), DomainError);
  Vector bad(2);
  bad << 0.1, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(d_A_estimate(bad, p, 1000, s), InputError);
}

TEST(RLCDParams, Validation) {
  RLCDParams p;
  EXPECT_NO_THROW(p.validate());
  p.alpha = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.resolution = p.radius_cap;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.mc_trials = 99;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(RLCD, OneDimensionalRademacherOracle) {
  const auto p = rademacher(1, 1);
  RLCDParams params;
  params.resolution = 1e-3;
  params.record_trace = true;
  RandomStream s(7);
  const auto est = rlcd_estimate(Matrix::Identity(1, 1), p, {0}, params, s);
  // Oracle: E dist^2(t Xbar) = dist^2(2t) / 2, scanned at 1e-6.
  const double inf = scan_infimum([](double t) { return 0.5 * nearest_dist2(2 * t); }, 1.0, 0.5, 2.0, 3.0, 1e-6);
  EXPECT_NEAR(inf, 2.0, 2e-6);
  EXPECT_DOUBLE_EQ(est.analytic_floor, 2.0);
  EXPECT_LE(est.lower, 2.0);
  EXPECT_GE(est.upper, 2.0);
  EXPECT_LE(est.upper - est.lower, 5e-3);
  ASSERT_TRUE(est.witness.has_value());
  EXPECT_NEAR(est.witness->norm(), est.upper, 1e-12);
  EXPECT_TRUE(est.exact_expectation);
  EXPECT_FALSE(est.trace.empty());
  EXPECT_TRUE(est.trace.back().witness);
  // The witness window right of 2 closes near 2.235, short of 2.25.
  for (double t = 2.001; t < 2.23; t += 0.001) EXPECT_LT(0.5 * nearest_dist2(2 * t), log_plus(t / 2));
  EXPECT_GE(0.5 * nearest_dist2(2 * 2.24), log_plus(2.24 / 2));
}

TEST(RLCD, TwoCoordinateDiagonalDirection) {
  const auto p = rademacher(2, 1);
  Matrix basis(1, 2);
  basis << 1, 1;
  basis /= std::sqrt(2.0);
  RLCDParams params;
  params.resolution = 1e-3;
  RandomStream s(8);
  const auto est = rlcd_estimate(basis, p, {0}, params, s);
  const double inf = scan_infimum(
      [](double t) {
        const double y = t / std::sqrt(2.0);
        double acc = 0.0;
        for (double a : {-1.0, 1.0})
          for (double b : {-1.0, 1.0})
            for (double c : {-1.0, 1.0})
              for (double d : {-1.0, 1.0}) acc += (nearest_dist2(y * (a - b)) + nearest_dist2(y * (c - d))) / 16.0;
        return acc;
      },
      1.0, 0.5, 2.0, 10.0, 1e-6);
  ASSERT_TRUE(std::isfinite(inf));
  EXPECT_GE(inf, est.lower - params.resolution);
  EXPECT_LE(inf, est.upper + params.resolution);
  EXPECT_GE(est.lower, est.analytic_floor);
}

TEST(RLCD, FloorAndExhaustion) {
  const auto p = rademacher(3, 2);
  RandomStream s(9);
  Matrix basis = Matrix::Zero(2, 3);
  basis(0, 0) = 1.0;
  basis(1, 1) = 1.0;
  RLCDParams params;
  params.radius_cap = 3.0;
  params.resolution = 0.05;
  const auto est = rlcd_estimate(basis, p, {0, 1}, params, s);
  EXPECT_GE(est.lower, est.analytic_floor);
  EXPECT_LE(est.lower, est.upper);
  EXPECT_EQ(est.witness.has_value(), std::isfinite(est.upper));

  params.L = 10.0;  // floor 20 > radius_cap
  const auto none = rlcd_estimate(basis, p, {0, 1}, params, s);
  EXPECT_TRUE(none.exhausted_below_floor);
  EXPECT_EQ(none.lower, params.radius_cap);
  EXPECT_TRUE(std::isinf(none.upper));
  EXPECT_FALSE(none.witness.has_value());
}

TEST(Levy, Examples) {
  RandomStream s(10);
  const VectorSampler constant = [](RandomStream&, std::span<double> out) {
    out[0] = 3.0;
    out[1] = -1.0;
  };
  EXPECT_EQ(levy_estimate(constant, 2, 0.0, 1000, s).probability, 1.0);
  const VectorSampler sign = [](RandomStream& r, std::span<double> out) { out[0] = r.bernoulli(0.5) ? 1.0 : -1.0; };
  const auto half = levy_estimate(sign, 1, 0.5, 100000, s);
  EXPECT_NEAR(half.probability, 0.5, 4 * 0.5 / std::sqrt(100000.0) + 1e-12);
  EXPECT_GT(half.stderr, 0.0);
  EXPECT_EQ(levy_estimate(sign, 1, 1.0, 1000, s).probability, 1.0);
}

TEST(Levy, MonotoneInRadius) {
  RandomStream s(11);
  const VectorSampler g = [](RandomStream& r, std::span<double> out) {
    for (double& v : out) v = r.normal();
  };
  const auto samples = draw_levy_samples(g, 3, 5000, s);
  double prev = 0.0;
  for (double t = 0.0; t < 4.0; t += 0.1) {
    const double p = levy_from_samples(samples, t).probability;
    EXPECT_GE(p, prev);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
}

TEST(Esseen, Examples) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(esseen_bound_eval(1, 1, 1, 1, inf, 0.1, 1), 0.1, 1e-15);
  EXPECT_NEAR(esseen_bound_eval(1, 2, 0.5, 3, inf, 0.4, 1.5) / esseen_bound_eval(1, 2, 0.5, 3, inf, 0.2, 1.5), 2.0,
              1e-14);
  const double L = 1.3, alpha = 0.4, det = 2.0, rd = 7.0, t = 0.2, C = 1.1;
  const double lead = C * L / (alpha * std::sqrt(2.0));
  const double tail = t + std::sqrt(2.0) / rd;
  EXPECT_NEAR(esseen_bound_eval(2, L, alpha, det, rd, t, C), lead * lead / det * tail * tail, 1e-12);
  EXPECT_THROW(esseen_bound_eval(0, 1, 0.5, 1, inf, 0.1, 1), DomainError);
  EXPECT_THROW(esseen_bound_eval(1, 1, 0.5, 0, inf, 0.1, 1), DomainError);
}

TEST(LatticeCount, Examples) {
  EXPECT_EQ(count_lattice_points(1, 2.5, 3).exact, 5u);
  EXPECT_EQ(count_lattice_points(2, 1, 3).exact, 5u);
  EXPECT_EQ(count_lattice_points(2, 2, 3).exact, 13u);
  EXPECT_THROW(count_lattice_points(5, 1, 3), ResourceError);
  EXPECT_THROW(count_lattice_points(2, 21, 3), ResourceError);
}

TEST(LatticeCount, CircleSumsAndBound) {
  for (double R = 0.5; R <= 10.0; R += 0.5) {
    // n = 2 by columns: 2 floor(sqrt(R^2 - x^2)) + 1 for |x| <= R.
    std::size_t want = 0;
    for (long x = -static_cast<long>(R); x <= static_cast<long>(R); ++x) {
      want += 2 * static_cast<std::size_t>(std::floor(std::sqrt(R * R - double(x * x)) + 1e-12)) + 1;
    }
    EXPECT_EQ(count_lattice_points(2, R, 3).exact, want) << R;
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto c = count_lattice_points(n, R, 3);
      EXPECT_NEAR(c.bound, std::pow(2 + 3 * R / std::sqrt(double(n)), double(n)), 1e-9 * c.bound);
      EXPECT_LE(static_cast<double>(c.exact), c.bound);
    }
  }
}
