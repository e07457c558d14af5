// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rankprobe/arithmetic.hpp"
#include "rankprobe/ensembles.hpp"
#include "rankprobe/experiments.hpp"
#include "rankprobe/linalg.hpp"
#include "rankprobe/random.hpp"
#include "rankprobe/rounding.hpp"
#include "rankprobe/selection.hpp"
#include "rankprobe/text.hpp"

namespace fs = std::filesystem;
using namespace rankprobe;
using ensembles::DistributionLaw;
using ensembles::EntryProfile;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double x) { return text::format_double(x); }

Matrix gaussian(RandomStream& s, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = s.normal();
  return m;
}

experiments::ExperimentConfig rademacher_config(std::size_t n, std::size_t k, std::size_t trials, std::uint64_t seed,
                                                std::optional<double> tol = std::nullopt) {
  return {.profile = EntryProfile(n, n, DistributionLaw::rademacher(), 10.0),
          .n = n,
          .k = k,
          .epsilon_grid = {},
          .gamma = 0.25,
          .trials = trials,
          .master_seed = seed,
          .tol = tol,
          .threads = 1};
}

void mc_against(Outcome& o, double exact, std::size_t n, std::size_t trials, std::uint64_t seed) {
  const auto est = experiments::rank_tail_mc(rademacher_config(n, 1, trials, seed));
  const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(trials));
  o.require(std::abs(est.estimate - exact) <= 3 * se,
            "MC " + fmt(est.estimate) + " not within 3 se (" + fmt(se) + ") of " + fmt(exact));
  o.note("MC " + fmt(est.estimate) + " vs exact " + fmt(exact));
}

Outcome criterion1() {
  Outcome o;
  const auto exact = experiments::rank_tail_exact_rademacher(2, 1);
  o.require(exact == experiments::Rational{1, 2}, "exact oracle gave " + std::to_string(exact.num) + "/" +
                                                      std::to_string(exact.den));
  mc_against(o, 0.5, 2, 100000, 101);
  return o;
}

Outcome criterion2() {
  Outcome o;
  // Independent oracle: 3 x 3 sign matrices with zero determinant.
  long singular = 0;
  for (int mask = 0; mask < 512; ++mask) {
    int a[9];
    for (int i = 0; i < 9; ++i) a[i] = (mask >> i & 1) ? 1 : -1;
    const long det = long{a[0]} * (a[4] * a[8] - a[5] * a[7]) - long{a[1]} * (a[3] * a[8] - a[5] * a[6]) +
                     long{a[2]} * (a[3] * a[7] - a[4] * a[6]);
    singular += det == 0;
  }
  const auto exact = experiments::rank_tail_exact_rademacher(3, 1);
  o.require(exact.value() == singular / 512.0, "enumeration mismatch");
  o.note("exact " + std::to_string(exact.num) + "/" + std::to_string(exact.den));
  mc_against(o, exact.value(), 3, 100000, 202);
  return o;
}

Outcome criterion3() {
  Outcome o;
  RandomStream s(303);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Vector y(5);
    for (Eigen::Index i = 0; i < 5; ++i) y(i) = 20.0 * (s.uniform() - 0.5);
    // Every lattice point within +-2 of floor(y) in each coordinate.
    double best = std::numeric_limits<double>::infinity();
    for (int code = 0; code < 3125; ++code) {
      double acc = 0.0;
      int c = code;
      for (Eigen::Index i = 0; i < 5; ++i, c /= 5) {
        const double m = std::floor(y(i)) + (c % 5) - 2;
        acc += (y(i) - m) * (y(i) - m);
      }
      best = std::min(best, acc);
    }
    worst = std::max(worst, std::abs(arithmetic::dist_to_lattice(y) - std::sqrt(best)));
  }
  o.require(worst <= 1e-12, "max difference " + fmt(worst));
  o.note("max difference " + fmt(worst));
  return o;
}

Outcome criterion4() {
  Outcome o;
  o.require(arithmetic::count_lattice_points(2, 2, 3).exact == 13, "count(2, 2) != 13");
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int h = 1; h <= 20; ++h) {
      const double R = 0.5 * h;
      const auto c = arithmetic::count_lattice_points(n, R, 3);
      const double bound = std::pow(2 + 3 * R / std::sqrt(double(n)), double(n));
      o.require(static_cast<double>(c.exact) <= bound,
                "n = " + std::to_string(n) + ", R = " + fmt(R) + ": " + std::to_string(c.exact) + " > " + fmt(bound));
    }
  }
  o.note("80 (n, R) pairs checked against (2 + 3R/sqrt(n))^n");
  return o;
}

Outcome criterion5() {
  Outcome o;
  RandomStream s(505);
  const double delta = 0.1;
  Vector v(50);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 10.0 * (s.uniform() - 0.5);
  v(0) = 0.3;  // one coordinate already on the grid
  Vector sum = Vector::Zero(50);
  const int draws = 10000;
  int off_grid = 0, too_far = 0;
  for (int t = 0; t < draws; ++t) {
    const auto r = rounding::randomized_round(v, delta, s);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      off_grid += std::abs(r.u(i) - std::nearbyint(r.u(i) / delta) * delta) > 1e-12;
      too_far += std::abs(r.u(i) - v(i)) > delta;
    }
    sum += r.u;
  }
  o.require(off_grid == 0, std::to_string(off_grid) + " off-grid coordinates");
  o.require(too_far == 0, std::to_string(too_far) + " coordinates moved more than delta");
  double worst_z = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p = v(i) / delta - std::floor(v(i) / delta);
    const double se = delta * std::sqrt(p * (1 - p) / draws);
    const double dev = std::abs(sum(i) / draws - v(i));
    if (se > 0) {
      worst_z = std::max(worst_z, dev / se);
    } else {
      o.require(dev <= 1e-12, "grid coordinate moved");
    }
  }
  o.require(worst_z <= 4.0, "mean off by " + fmt(worst_z) + " se");
  o.note("max |z| " + fmt(worst_z));
  return o;
}

Outcome criterion6() {
  Outcome o;
  RandomStream s(606);
  double worst = 0.0;
  int beaten = 0;
  for (int t = 0; t < 100; ++t) {
    const Matrix m = gaussian(s, 20, 20);
    const auto sp = linalg::singular_spectrum(m);
    for (std::size_t k : {1u, 2u, 5u}) {
      const auto w = linalg::minmax_kth_smallest(m, k);
      worst = std::max(worst, std::abs(w.value - sp.s(20 - k + 1)));
      for (int r = 0; r < 1000; ++r) {
        Eigen::HouseholderQR<Matrix> qr(gaussian(s, 20, static_cast<Eigen::Index>(k)));
        const Matrix basis = qr.householderQ() * Matrix::Identity(20, static_cast<Eigen::Index>(k));
        beaten += linalg::max_gain_on_subspace(m, basis) < w.value - 1e-12;
      }
    }
  }
  o.require(worst <= 1e-8, "min-max differs from SVD by " + fmt(worst));
  o.require(beaten == 0, std::to_string(beaten) + " random subspaces beat the min-max value");
  o.note("max difference " + fmt(worst));
  return o;
}

Outcome criterion7() {
  Outcome o;
  const std::vector<DistributionLaw> laws = {
      DistributionLaw::rademacher(),
      DistributionLaw::gaussian(),
      DistributionLaw::uniform(),
      DistributionLaw::sparse_bernoulli(0.5),
      DistributionLaw::sparse_bernoulli(0.05),
      DistributionLaw::discrete({-1.0, 0.0, 2.0}, {0.3, 0.5, 0.2}),
  };
  RandomStream s(707);
  const int draws = 100000;
  for (const auto& law : laws) {
    int hits = 0;
    for (int t = 0; t < draws; ++t) hits += std::abs(ensembles::sample_symmetrized(law, s)) >= 1.0;
    const double p = hits / double(draws);
    const double se = std::sqrt(p * (1 - p) / draws);
    const double floor = ensembles::paley_zygmund_floor(law.declared_psi2());
    o.require(p >= floor - 3 * se, law.to_string() + ": " + fmt(p) + " < floor " + fmt(floor));
    o.note(law.to_string() + " " + fmt(p) + " >= " + fmt(floor));
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const EntryProfile p(1, 1, DistributionLaw::rademacher(), 10.0);
  arithmetic::RLCDParams params;
  params.L = 1.0;
  params.alpha = 0.5;
  params.resolution = 1e-3;
  RandomStream s(808);
  const auto est = arithmetic::rlcd_estimate(Matrix::Identity(1, 1), p, {0}, params, s);
  // Oracle: exact two-atom expectation dist^2(2t)/2 scanned at 1e-6.
  double inf = std::numeric_limits<double>::infinity();
  for (double t = 1e-6; t < 10.0; t += 1e-6) {
    const double r = 2 * t - std::nearbyint(2 * t);
    if (0.5 * r * r < arithmetic::log_plus(0.5 * t)) {
      inf = t;
      break;
    }
  }
  o.require(std::abs(inf - 2.0) < 1e-5, "oracle infimum " + fmt(inf));
  o.require(est.lower <= 2.0 && 2.0 <= est.upper, "interval misses 2");
  o.require(est.upper - est.lower <= 5e-3, "width " + fmt(est.upper - est.lower));
  o.note("[" + fmt(est.lower) + ", " + fmt(est.upper) + "], oracle " + fmt(inf));
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto r = experiments::tensorization_check(2, 0.25);
  o.require(r.probability == 0.125, "P = " + fmt(r.probability));
  const double bound = std::pow(0.25 * std::exp(1.0), 2.0);
  o.require(std::abs(r.bound - bound) <= 1e-15 && r.bound >= 0.125, "bound " + fmt(r.bound));
  for (std::size_t n = 1; n <= 10; ++n) {
    for (int h = 1; h <= 10; ++h) {
      const auto c = experiments::tensorization_check(n, 0.05 * h);
      o.require(c.probability <= c.bound, "n = " + std::to_string(n) + ", t = " + fmt(0.05 * h));
    }
  }
  o.note("P = " + fmt(r.probability) + ", bound = " + fmt(r.bound));
  return o;
}

Outcome criterion10() {
  Outcome o;
  RandomStream s(1010);
  double max_ratio = 0.0;
  int dominated = 0;
  for (int t = 0; t < 100; ++t) {
    const Matrix M = gaussian(s, 5, 12);
    const auto ex = selection::ri_select(M, 2, selection::SelectionMode::exhaustive);
    const auto gr = selection::ri_select(M, 2, selection::SelectionMode::greedy);
    max_ratio = std::max(max_ratio, ex.ratio);
    dominated += ex.s_l_selected < gr.s_l_selected;
  }
  o.require(max_ratio <= 10.0, "max ratio " + fmt(max_ratio));
  o.require(dominated == 0, std::to_string(dominated) + " instances where greedy beat exhaustive");
  o.note("max ratio " + fmt(max_ratio));
  return o;
}

Outcome criterion11() {
  Outcome o;
  const std::vector<double> eps = {0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0};
  const std::vector<std::pair<DistributionLaw, std::size_t>> runs = {
      {DistributionLaw::rademacher(), 4}, {DistributionLaw::rademacher(), 6},
      {DistributionLaw::sparse_bernoulli(0.3), 6}, {DistributionLaw::gaussian(), 8},
      {DistributionLaw::uniform(), 5}};
  std::uint64_t seed = 1100;
  for (const auto& [law, n] : runs) {
    experiments::ExperimentConfig c{.profile = EntryProfile(n, n, law, 10.0),
                                    .n = n,
                                    .k = 1,
                                    .epsilon_grid = eps,
                                    .gamma = 0.25,
                                    .trials = 20000,
                                    .master_seed = ++seed,
                                    .tol = std::nullopt,
                                    .threads = 1};
    std::vector<std::size_t> ks(n + 1);
    std::iota(ks.begin(), ks.end(), 0);
    const auto g = experiments::tail_grid(c, ks, eps);
    const std::string tag = law.to_string() + " n = " + std::to_string(n);
    for (std::size_t ki = 1; ki < ks.size(); ++ki) {
      o.require(g.rank[ki].estimate <= g.rank[ki - 1].estimate, tag + ": rank tail increases in k");
    }
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      for (std::size_t ei = 1; ei < eps.size(); ++ei) {
        o.require(g.singular[ki][ei].estimate >= g.singular[ki][ei - 1].estimate,
                  tag + ": singular tail decreases in epsilon");
      }
      o.require(g.singular[ki][0].estimate == g.rank[ki].estimate, tag + ": epsilon = 0 differs from rank tail");
    }
  }
  o.note(std::to_string(runs.size()) + " coupled grids checked");
  return o;
}

Outcome criterion12() {
  Outcome o;
  // |det| >= 1 for a non-singular sign matrix, so s_n >= s_1^{1-n} >= 1e-9
  // at n = 10; tol = 1e-10 separates singular from non-singular exactly.
  std::vector<experiments::ScalingPoint> points;
  std::uint64_t seed = 1200;
  for (std::size_t n : {6u, 8u, 10u}) {
    const auto est = experiments::rank_tail_mc(rademacher_config(n, 1, 1000000, ++seed, 1e-10));
    points.push_back({n, 1, est.estimate});
    o.note("p(" + std::to_string(n) + ") = " + fmt(est.estimate) + " +- " + fmt(est.stderr));
  }
  const auto fit = experiments::scaling_fit(points);
  o.require(fit.c_hat > 0.0, "c_hat = " + fmt(fit.c_hat));
  o.require(points[0].probability > points[1].probability && points[1].probability > points[2].probability,
            "probabilities not decreasing in n");
  o.note("c_hat = " + fmt(fit.c_hat));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RANKPROBE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion13() {
  Outcome o;
  const std::map<std::string, std::string> campaigns = {
      {"rank-tail", "kind = rank-tail\nseed = 13\nlaw.*.* = rademacher\nn = 2, 3, 4\nk = 1, 2\ntrials = 20000\n"
                    "exact = true\n"},
      {"singular-tail", "kind = singular-tail\nseed = 14\nlaw.*.* = gaussian\nlaw.0.* = uniform\nn = 8\nk = 1, 3\n"
                        "epsilon = 0, 0.5, 1, 2\ntrials = 5000\n"},
      {"rlcd", "kind = rlcd\nseed = 15\nlaw.*.* = rademacher\nn = 3\nbasis = random\nm = 2\nradius_cap = 4\n"
               "resolution = 0.05\ntrace = true\n"},
      {"round", "kind = round\nseed = 16\nlaw.*.* = sparse-bernoulli(0.5)\nn = 20\nl = 2\ndelta = 0.05\ndraws = 5\n"
                "span_samples = 100\nannulus_samples = 100\n"},
      {"ri-select", "kind = ri-select\nseed = 17\nlaw.*.* = gaussian\nrows = 5\ncols = 12\nl = 2\ninstances = 20\n"
                    "mode = both\n"},
      {"norms", "kind = norms\nseed = 18\nlaw.*.* = rademacher\nn = 5, 10\ntrials = 200\n"},
  };
  const fs::path root = fs::temp_directory_path() / "rankprobe_acceptance_13";
  fs::remove_all(root);
  fs::create_directories(root);
  for (const auto& [name, text] : campaigns) {
    const fs::path cfg = root / (name + ".cfg");
    std::ofstream(cfg) << text;
    const fs::path first = root / (name + ".first");
    const fs::path again = root / (name + ".again");
    const int a = run_cli(name + " --config " + cfg.string() + " --out " + first.string());
    const int b = run_cli(name + " --config " + (first / "manifest.txt").string() + " --out " + again.string());
    o.require(a == 0 && b == 0, name + ": exit codes " + std::to_string(a) + ", " + std::to_string(b));
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(first)) {
      const auto other = again / e.path().filename();
      o.require(fs::exists(other) && slurp(e.path()) == slurp(other),
                name + ": " + e.path().filename().string() + " differs");
      ++files;
    }
    o.note(name + " " + std::to_string(files) + " files");
  }
  return o;
}

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // 0 means no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "exact-oracle agreement, rademacher n = 2", 30, criterion1},
      {2, "enumeration oracle, rademacher n = 3", 120, criterion2},
      {3, "lattice distance vs brute-force search", 0, criterion3},
      {4, "lattice point counts and bound", 0, criterion4},
      {5, "randomized rounding: grid, sup-norm, unbiasedness", 60, criterion5},
      {6, "min-max identity and random subspaces", 0, criterion6},
      {7, "Paley-Zygmund floor for built-in laws", 0, criterion7},
      {8, "RLCD one-dimensional oracle", 0, criterion8},
      {9, "tensorization exact value and bound", 0, criterion9},
      {10, "restricted invertibility certificates", 300, criterion10},
      {11, "monotonicity under shared-seed coupling", 0, criterion11},
      {12, "rank-tail scaling fit, n = 6, 8, 10", 900, criterion12},
      {13, "determinism of reruns from the manifest", 0, criterion13},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.require(false, "runtime " + fmt(secs) + " s exceeds " + fmt(c.limit_seconds) + " s");
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
