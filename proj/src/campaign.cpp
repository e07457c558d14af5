#include "rankprobe/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rankprobe/arithmetic.hpp"
#include "rankprobe/errors.hpp"
#include "rankprobe/experiments.hpp"
#include "rankprobe/linalg.hpp"
#include "rankprobe/rounding.hpp"
#include "rankprobe/selection.hpp"

namespace rankprobe::campaign {

namespace {

enum class ValueType { count, counts, real, reals, flag, word };

struct KeySpec {
  std::string_view key;
  ValueType type;
  bool required = false;
};

const std::vector<KeySpec>& key_specs(Kind kind) {
  using enum ValueType;
  static const std::map<Kind, std::vector<KeySpec>> specs = {
      {Kind::sample, {{"n", counts, true}, {"count", count}}},
      {Kind::rank_tail, {{"n", counts, true}, {"k", counts}, {"trials", count}, {"tol", real}, {"exact", flag}}},
      {Kind::singular_tail,
       {{"n", counts, true},
        {"k", counts},
        {"epsilon", reals, true},
        {"gamma", real},
        {"trials", count},
        {"tol", real},
        {"comparison_C", real}}},
      {Kind::rlcd,
       {{"n", count, true},
        {"basis", word},
        {"m", count},
        {"L", real},
        {"alpha", real},
        {"radius_cap", real},
        {"resolution", real},
        {"mc_trials", count},
        {"directions", count},
        {"grid_budget", count},
        {"trace", flag}}},
      {Kind::round,
       {{"n", count, true},
        {"l", count},
        {"delta", real},
        {"rho", real},
        {"tau", real},
        {"K", real},
        {"r", real},
        {"C_op", real},
        {"draws", count},
        {"span_samples", count},
        {"annulus_samples", count}}},
      {Kind::ri_select,
       {{"rows", count, true}, {"cols", count, true}, {"l", count}, {"instances", count}, {"mode", word}}},
      {Kind::tensorize, {{"n", counts, true}, {"t", reals, true}}},
      {Kind::norms, {{"n", counts, true}, {"trials", count}, {"C_op", real}, {"C_hs", real}}},
  };
  return specs.at(kind);
}

const std::vector<std::pair<Kind, std::string_view>> kKindNames = {
    {Kind::sample, "sample"},       {Kind::rank_tail, "rank-tail"}, {Kind::singular_tail, "singular-tail"},
    {Kind::rlcd, "rlcd"},           {Kind::round, "round"},         {Kind::ri_select, "ri-select"},
    {Kind::tensorize, "tensorize"}, {Kind::norms, "norms"},
};

template <class T>
bool parse_whole(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

double parse_real(std::string_view s, std::size_t line, std::string_view key) {
  double v = 0.0;
  if (!parse_whole(s, v) || !std::isfinite(v)) {
    throw ParseError(line, "'" + std::string(key) + "' expects a finite number, got '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line, std::string_view key) {
  std::size_t v = 0;
  if (!parse_whole(s, v)) {
    throw ParseError(line, "'" + std::string(key) + "' expects a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_flag(std::string_view s, std::size_t line, std::string_view key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError(line, "'" + std::string(key) + "' expects true or false");
}

std::vector<std::string_view> grid_items(std::string_view s, std::size_t line, std::string_view key) {
  auto items = text::split(s, ',');
  for (auto item : items) {
    if (item.empty()) throw ParseError(line, "malformed grid for '" + std::string(key) + "'");
  }
  return items;
}

void check_value(const text::KeyValueLine& kv, ValueType type) {
  switch (type) {
    case ValueType::count:
      parse_count(kv.value, kv.line, kv.key);
      break;
    case ValueType::real:
      parse_real(kv.value, kv.line, kv.key);
      break;
    case ValueType::flag:
      parse_flag(kv.value, kv.line, kv.key);
      break;
    case ValueType::word:
      if (kv.value.empty()) throw ParseError(kv.line, "'" + kv.key + "' needs a value");
      break;
    case ValueType::counts:
      for (auto item : grid_items(kv.value, kv.line, kv.key)) parse_count(item, kv.line, kv.key);
      break;
    case ValueType::reals: {
      double prev = -std::numeric_limits<double>::infinity();
      for (auto item : grid_items(kv.value, kv.line, kv.key)) {
        const double v = parse_real(item, kv.line, kv.key);
        if (!(v > prev)) throw ParseError(kv.line, "grid '" + kv.key + "' must be strictly ascending");
        prev = v;
      }
      break;
    }
  }
}

std::uint64_t parse_seed(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  if (!parse_whole(s, v)) throw ParseError(line, "'seed' expects an unsigned 64-bit integer");
  return v;
}

}  // namespace

std::string_view kind_name(Kind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<Kind> parse_kind(std::string_view name) noexcept {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<std::string_view>& kind_keys(Kind kind) {
  static std::map<Kind, std::vector<std::string_view>> cache = [] {
    std::map<Kind, std::vector<std::string_view>> out;
    for (const auto& [k, name] : kKindNames) {
      for (const auto& spec : key_specs(k)) out[k].push_back(spec.key);
    }
    return out;
  }();
  return cache.at(kind);
}

const text::KeyValueLine* CampaignFile::find(std::string_view key) const {
  for (const auto& kv : settings) {
    if (kv.key == key) return &kv;
  }
  return nullptr;
}

bool CampaignFile::has(std::string_view key) const { return find(key) != nullptr; }

std::string CampaignFile::text(std::string_view key, std::string_view fallback) const {
  const auto* kv = find(key);
  return kv ? kv->value : std::string(fallback);
}

double CampaignFile::real(std::string_view key, double fallback) const {
  const auto* kv = find(key);
  return kv ? parse_real(kv->value, kv->line, kv->key) : fallback;
}

std::optional<double> CampaignFile::optional_real(std::string_view key) const {
  const auto* kv = find(key);
  if (!kv) return std::nullopt;
  return parse_real(kv->value, kv->line, kv->key);
}

std::size_t CampaignFile::count(std::string_view key, std::size_t fallback) const {
  const auto* kv = find(key);
  return kv ? parse_count(kv->value, kv->line, kv->key) : fallback;
}

bool CampaignFile::flag(std::string_view key, bool fallback) const {
  const auto* kv = find(key);
  return kv ? parse_flag(kv->value, kv->line, kv->key) : fallback;
}

std::vector<double> CampaignFile::reals(std::string_view key, std::vector<double> fallback) const {
  const auto* kv = find(key);
  if (!kv) return fallback;
  std::vector<double> out;
  for (auto item : grid_items(kv->value, kv->line, kv->key)) out.push_back(parse_real(item, kv->line, kv->key));
  return out;
}

std::vector<std::size_t> CampaignFile::counts(std::string_view key, std::vector<std::size_t> fallback) const {
  const auto* kv = find(key);
  if (!kv) return fallback;
  std::vector<std::size_t> out;
  for (auto item : grid_items(kv->value, kv->line, kv->key)) out.push_back(parse_count(item, kv->line, kv->key));
  return out;
}

ensembles::EntryProfile CampaignFile::profile(std::size_t rows, std::size_t cols) const {
  return ensembles::EntryProfile(rows, cols, laws, K_cap);
}

std::string CampaignFile::to_text() const {
  std::string out;
  out += "kind = " + std::string(kind_name(kind)) + "\n";
  out += "id = " + experiment_id + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  out += "K_cap = " + text::format_double(K_cap) + "\n";
  for (const auto& rule : laws) out += ensembles::law_rule_key(rule) + " = " + rule.law.to_string() + "\n";
  for (const auto& kv : settings) out += kv.key + " = " + kv.value + "\n";
  return out;
}

CampaignFile parse_campaign(std::string_view source, std::optional<Kind> expected) {
  std::optional<Kind> kind;
  std::optional<std::string> id;
  std::optional<std::uint64_t> seed;
  std::optional<double> K_cap;
  std::vector<ensembles::LawRule> laws;
  std::vector<text::KeyValueLine> rest;
  std::map<std::string, std::size_t> seen;

  for (auto& kv : text::parse_key_values(source)) {
    if (!kv.key.starts_with("law.")) {
      const auto [it, fresh] = seen.emplace(kv.key, kv.line);
      if (!fresh) {
        throw ParseError(kv.line, "duplicate key '" + kv.key + "' (first set on line " + std::to_string(it->second) + ")");
      }
    }
    if (kv.key == "kind") {
      kind = parse_kind(kv.value);
      if (!kind) throw ParseError(kv.line, "unknown experiment kind '" + kv.value + "'");
    } else if (kv.key == "id") {
      if (kv.value.empty() || kv.value.find_first_of(",/\\ \t") != std::string::npos) {
        throw ParseError(kv.line, "'id' must be non-empty without commas, slashes or spaces");
      }
      id = kv.value;
    } else if (kv.key == "seed") {
      seed = parse_seed(kv.value, kv.line);
    } else if (kv.key == "K_cap") {
      K_cap = parse_real(kv.value, kv.line, kv.key);
    } else if (kv.key.starts_with("law.")) {
      laws.push_back(ensembles::parse_law_rule(std::string_view(kv.key).substr(4), kv.value, kv.line));
    } else {
      rest.push_back(std::move(kv));
    }
  }

  if (!kind && !expected) throw ParseError(0, "missing required key 'kind'");
  if (kind && expected && *kind != *expected) {
    throw ParseError(seen.at("kind"), "campaign kind '" + std::string(kind_name(*kind)) +
                                           "' does not match subcommand '" + std::string(kind_name(*expected)) + "'");
  }
  if (!seed) throw ParseError(0, "missing required key 'seed'");

  CampaignFile c{kind ? *kind : *expected, "", *seed, K_cap.value_or(10.0), std::move(laws), {}};
  c.experiment_id = id.value_or(std::string(kind_name(c.kind)));

  const auto& specs = key_specs(c.kind);
  for (auto& kv : rest) {
    const auto spec = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.key == kv.key; });
    if (spec == specs.end()) {
      throw ParseError(kv.line, "unknown key '" + kv.key + "' for kind '" + std::string(kind_name(c.kind)) + "'");
    }
    check_value(kv, spec->type);
    c.settings.push_back(std::move(kv));
  }
  for (const auto& spec : specs) {
    if (spec.required && !c.has(spec.key)) throw ParseError(0, "missing required key '" + std::string(spec.key) + "'");
  }
  if (c.kind != Kind::tensorize) {
    if (c.laws.empty()) throw ParseError(0, "missing law rules (e.g. law.*.* = rademacher)");
    // Resolve every rule once at the largest requested size.
    std::size_t rows = 1;
    std::size_t cols = 1;
    if (c.kind == Kind::ri_select) {
      rows = c.count("rows", 1);
      cols = c.count("cols", 1);
    } else {
      for (std::size_t n : c.counts("n", {1})) rows = cols = std::max(rows, n);
    }
    if (rows == 0 || cols == 0) throw ConfigError("matrix dimensions must be positive");
    (void)c.profile(rows, cols);
  }
  return c;
}

namespace {

class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, const CampaignFile& c) : dir_(std::move(dir)), campaign_(c) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
      throw IoError("cannot create output directory '" + dir_.string() + "'");
    }
    results_.open(dir_ / "results.csv", std::ios::out | std::ios::trunc);
    if (!results_) throw IoError("cannot write '" + (dir_ / "results.csv").string() + "'");
    results_ << kResultsHeader << '\n' << std::flush;
  }

  void row(const std::string& id, std::optional<std::size_t> n, std::optional<std::size_t> k,
           std::optional<double> epsilon, double estimate, double stderr, std::uint64_t trials) {
    const auto opt = [](const auto& v) -> std::string {
      if (!v) return "";
      if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>) {
        return text::format_double(*v);
      } else {
        return std::to_string(*v);
      }
    };
    results_ << id << ',' << opt(n) << ',' << opt(k) << ',' << opt(epsilon) << ',' << text::format_double(estimate)
             << ',' << text::format_double(stderr) << ',' << trials << ',' << campaign_.seed << '\n'
             << std::flush;
    if (!results_) throw IoError("write to results.csv failed");
  }

  void series(const std::string& name, const std::vector<double>& x, const std::vector<double>& y) {
    std::ofstream out = open(campaign_.experiment_id + "." + name + ".tsv");
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
      out << text::format_double(x[i]) << '\t' << text::format_double(y[i]) << '\n';
    }
    finish(out, name);
  }

  std::ofstream open(const std::string& file) {
    std::ofstream out(dir_ / file, std::ios::out | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (dir_ / file).string() + "'");
    return out;
  }

  static void finish(std::ofstream& out, const std::string& what) {
    out.flush();
    if (!out) throw IoError("write failed for " + what);
  }

 private:
  std::filesystem::path dir_;
  const CampaignFile& campaign_;
  std::ofstream results_;
};

experiments::ExperimentConfig base_config(const CampaignFile& c, std::size_t n, unsigned threads) {
  return experiments::ExperimentConfig{
      .profile = c.profile(n, n),
      .n = n,
      .k = 0,
      .epsilon_grid = {},
      .gamma = c.real("gamma", 0.25),
      .trials = c.count("trials", 1000),
      .master_seed = c.seed,
      .tol = c.optional_real("tol"),
      .threads = threads,
  };
}

void run_sample(const CampaignFile& c, OutputDir& out, unsigned) {
  const std::size_t count = c.count("count", 1);
  for (std::size_t n : c.counts("n", {})) {
    const auto profile = c.profile(n, n);
    for (std::size_t t = 0; t < count; ++t) {
      RandomStream stream(derive_seed(c.seed, t));
      const Matrix m = ensembles::sample_matrix(profile, stream);
      auto file = out.open(c.experiment_id + ".n" + std::to_string(n) + "." + std::to_string(t) + ".csv");
      linalg::write_matrix_csv(file, m);
      OutputDir::finish(file, "matrix");
      const auto s = linalg::singular_spectrum(m);
      if (t == 0) {
        std::vector<double> idx;
        for (std::size_t i = 1; i <= s.size(); ++i) idx.push_back(static_cast<double>(i));
        out.series("n" + std::to_string(n) + ".spectrum", idx, s.values);
      }
      out.row(c.experiment_id, n, std::nullopt, std::nullopt, s.smallest(), 0.0, 1);
    }
  }
}

void run_rank_tail(const CampaignFile& c, OutputDir& out, unsigned threads, std::ostream& log) {
  const auto ks = c.counts("k", {1});
  const bool exact = c.flag("exact", false);
  std::vector<experiments::ScalingPoint> points;
  for (std::size_t n : c.counts("n", {})) {
    if (exact) {
      for (std::size_t k : ks) {
        const auto r = experiments::rank_tail_exact_rademacher(n, k);
        out.row(c.experiment_id + ".exact", n, k, std::nullopt, r.value(), 0.0, std::uint64_t{1} << (n * n));
      }
    }
    const auto cfg = base_config(c, n, threads);
    const auto grid = experiments::tail_grid(cfg, ks, {});
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const auto& e = grid.rank[ki];
      out.row(c.experiment_id, n, ks[ki], std::nullopt, e.estimate, e.stderr, e.trials);
      xs.push_back(static_cast<double>(ks[ki]));
      ys.push_back(e.estimate);
      points.push_back({n, ks[ki], e.estimate});
    }
    out.series("n" + std::to_string(n), xs, ys);
  }
  try {
    const auto fit = experiments::scaling_fit(points);
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : points) {
      if (p.probability > 0.0) {
        xs.push_back(static_cast<double>(p.k * p.n));
        ys.push_back(-std::log(p.probability));
      }
    }
    out.series("fit", xs, ys);
    log << "scaling fit: c_hat = " << text::format_double(fit.c_hat) << " (" << fit.excluded
        << " zero-probability points excluded)\n";
  } catch (const DomainError& e) {
    log << "scaling fit skipped: " << e.what() << '\n';
  }
}

void run_singular_tail(const CampaignFile& c, OutputDir& out, unsigned threads, std::ostream& log) {
  const auto ks = c.counts("k", {1});
  const auto eps = c.reals("epsilon", {});
  const double C = c.real("comparison_C", 1.0);
  for (std::size_t n : c.counts("n", {})) {
    auto cfg = base_config(c, n, threads);
    cfg.epsilon_grid = eps;
    const auto grid = experiments::tail_grid(cfg, ks, eps);
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const std::size_t k = ks[ki];
      if (static_cast<double>(k) < std::log(static_cast<double>(n))) {
        log << "warning: n = " << n << ", k = " << k << " is below ln n; the tail bound is not claimed there\n";
      }
      std::vector<double> est;
      std::vector<double> cmp;
      for (std::size_t ei = 0; ei < eps.size(); ++ei) {
        const auto& e = grid.singular[ki][ei];
        out.row(c.experiment_id, n, k, eps[ei], e.estimate, e.stderr, e.trials);
        est.push_back(e.estimate);
        cmp.push_back(experiments::singular_tail_comparison(eps[ei], k, cfg.gamma, C));
      }
      const std::string tag = "n" + std::to_string(n) + ".k" + std::to_string(k);
      out.series(tag, eps, est);
      out.series(tag + ".comparison", eps, cmp);
    }
  }
}

Matrix rlcd_basis(const CampaignFile& c, std::size_t n, RandomStream& stream) {
  const std::string kind = c.text("basis", "e1");
  const auto N = static_cast<Eigen::Index>(n);
  if (kind == "e1") {
    Matrix b = Matrix::Zero(1, N);
    b(0, 0) = 1.0;
    return b;
  }
  if (kind == "ones") return Matrix::Constant(1, N, 1.0 / std::sqrt(static_cast<double>(n)));
  if (kind == "random") {
    const std::size_t m = c.count("m", 1);
    if (m < 1 || m > n) throw ConfigError("rlcd: m must lie in 1..n");
    Matrix g(N, static_cast<Eigen::Index>(m));
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      for (Eigen::Index i = 0; i < N; ++i) g(i, j) = stream.normal();
    }
    const linalg::ComplementProjector proj(g);
    return proj.span_basis().transpose();
  }
  throw ConfigError("rlcd: basis must be e1, ones or random");
}

void run_rlcd(const CampaignFile& c, OutputDir& out, unsigned) {
  const std::size_t n = c.count("n", 1);
  if (n < 1) throw ConfigError("rlcd: n must be positive");
  RandomStream basis_stream(derive_seed(c.seed, 1));
  RandomStream search_stream(derive_seed(c.seed, 2));
  const Matrix basis = rlcd_basis(c, n, basis_stream);
  arithmetic::RLCDParams p;
  p.L = c.real("L", 1.0);
  p.alpha = c.real("alpha", 0.5);
  p.radius_cap = c.real("radius_cap", 10.0);
  p.resolution = c.real("resolution", 1e-2);
  p.mc_trials = c.count("mc_trials", 1000);
  p.directions_per_shell = c.count("directions", 0);
  p.grid_budget = c.count("grid_budget", 200000);
  p.record_trace = c.flag("trace", false);
  std::vector<std::size_t> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = j;
  const auto est = arithmetic::rlcd_estimate(basis, c.profile(n, n), cols, p, search_stream);
  const auto m = static_cast<std::size_t>(basis.rows());
  out.row(c.experiment_id + ".floor", n, m, std::nullopt, est.analytic_floor, 0.0, est.evaluations);
  out.row(c.experiment_id + ".lower", n, m, std::nullopt, est.lower, 0.0, est.evaluations);
  out.row(c.experiment_id + ".upper", n, m, std::nullopt, est.upper, 0.0, est.evaluations);
  if (p.record_trace) {
    auto file = out.open(c.experiment_id + ".trace.csv");
    file << "radius,lhs,rhs,witness_flag\n";
    std::vector<double> r, lhs, rhs;
    for (const auto& row : est.trace) {
      file << text::format_double(row.radius) << ',' << text::format_double(row.lhs) << ','
           << text::format_double(row.rhs) << ',' << (row.witness ? 1 : 0) << '\n';
      r.push_back(row.radius);
      lhs.push_back(row.lhs);
      rhs.push_back(row.rhs);
    }
    OutputDir::finish(file, "trace");
    out.series("lhs", r, lhs);
    out.series("rhs", r, rhs);
  }
}

void run_round(const CampaignFile& c, OutputDir& out, unsigned) {
  const std::size_t n = c.count("n", 1);
  const std::size_t l = c.count("l", 1);
  if (l < 1 || l >= n) throw ConfigError("round: need 1 <= l < n");
  const auto a_profile = c.profile(n, n);
  rounding::RoundingParams p;
  p.rho = c.real("rho", 0.1);
  p.delta = c.real("delta", p.rho / 10.0);
  p.tau = c.real("tau", 0.5);
  double K = 0.0;
  for (const auto& law : a_profile.palette()) K = std::max(K, law.declared_psi2());
  p.K = c.real("K", K);
  p.r = c.real("r", 0.1);
  p.C_op = c.real("C_op", 3.0);
  p.span_samples = c.count("span_samples", 1000);
  p.annulus_samples = c.count("annulus_samples", 1000);
  const std::size_t draws = c.count("draws", 100);
  if (draws < 1) throw ConfigError("round: draws must be positive");

  // V: orthonormal l-frame in the kernel of an (n - l) x n sample B.
  RandomStream setup(derive_seed(c.seed, 0));
  const Matrix B = ensembles::sample_matrix(c.profile(n, n).resized(n - l, n), setup);
  const linalg::ComplementProjector row_space(B.transpose());
  if (row_space.rank() < l) throw DegenerateInstanceError("round: kernel of B is smaller than l");
  const Matrix V = row_space.complement_basis().leftCols(static_cast<Eigen::Index>(l));

  std::map<std::string, std::size_t> passes;
  for (std::size_t d = 0; d < draws; ++d) {
    RandomStream stream(derive_seed(c.seed, d + 1));
    const Matrix U = rounding::randomized_round_tuple(V, p.delta, stream);
    const auto report = rounding::rounding_report(V, U, a_profile, B, p, stream);
    if (d == 0) {
      auto file = out.open(c.experiment_id + ".report.csv");
      rounding::write_report_csv(file, report);
      OutputDir::finish(file, "report");
    }
    for (const auto& [name, check] : report.rows()) passes[name] += check.pass ? 1 : 0;
  }
  for (const auto& [name, check] : rounding::RoundingReport{}.rows()) {
    const double rate = static_cast<double>(passes[name]) / static_cast<double>(draws);
    out.row(c.experiment_id + "." + name, n, l, std::nullopt, rate,
            std::sqrt(rate * (1.0 - rate) / static_cast<double>(draws)), draws);
  }
}

void run_ri_select(const CampaignFile& c, OutputDir& out, unsigned threads) {
  const std::size_t rows = c.count("rows", 1);
  const std::size_t cols = c.count("cols", 1);
  const std::size_t l = c.count("l", 1);
  const std::size_t instances = c.count("instances", 1);
  const std::string mode = c.text("mode", "both");
  if (mode != "exhaustive" && mode != "greedy" && mode != "both") {
    throw ConfigError("ri-select: mode must be exhaustive, greedy or both");
  }
  const auto profile = c.profile(rows, cols);
  std::vector<std::pair<std::string, selection::SelectionMode>> modes;
  if (mode != "greedy") modes.emplace_back("exhaustive", selection::SelectionMode::exhaustive);
  if (mode != "exhaustive") modes.emplace_back("greedy", selection::SelectionMode::greedy);

  for (const auto& [name, m] : modes) {
    auto file = out.open(c.experiment_id + "." + name + ".certificates.csv");
    selection::write_certificate_header(file);
    double max_ratio = 0.0;
    double sum_ratio = 0.0;
    std::vector<double> idx;
    std::vector<double> ratios;
    for (std::size_t t = 0; t < instances; ++t) {
      RandomStream stream(derive_seed(c.seed, t));
      const auto cert = selection::ri_select(ensembles::sample_matrix(profile, stream), l, m, threads);
      selection::write_certificate_row(file, cert);
      max_ratio = std::max(max_ratio, cert.ratio);
      sum_ratio += cert.ratio;
      idx.push_back(static_cast<double>(t));
      ratios.push_back(cert.ratio);
    }
    OutputDir::finish(file, "certificates");
    out.series(name + ".ratio", idx, ratios);
    out.row(c.experiment_id + "." + name + ".max_ratio", cols, rows, std::nullopt, max_ratio, 0.0, instances);
    out.row(c.experiment_id + "." + name + ".mean_ratio", cols, rows, std::nullopt,
            sum_ratio / static_cast<double>(std::max<std::size_t>(instances, 1)), 0.0, instances);
  }
}

void run_tensorize(const CampaignFile& c, OutputDir& out, unsigned) {
  const auto ts = c.reals("t", {});
  for (std::size_t n : c.counts("n", {})) {
    std::vector<double> prob;
    std::vector<double> bound;
    for (double t : ts) {
      const auto r = experiments::tensorization_check(n, t);
      out.row(c.experiment_id, n, std::nullopt, t, r.probability, 0.0, 0);
      out.row(c.experiment_id + ".bound", n, std::nullopt, t, r.bound, 0.0, 0);
      prob.push_back(r.probability);
      bound.push_back(r.bound);
    }
    out.series("n" + std::to_string(n), ts, prob);
    out.series("n" + std::to_string(n) + ".bound", ts, bound);
  }
}

void run_norms(const CampaignFile& c, OutputDir& out, unsigned threads) {
  const auto ns = c.counts("n", {});
  const std::size_t max_n = ns.empty() ? 1 : *std::max_element(ns.begin(), ns.end());
  const auto rows = experiments::norm_concentration_mc(c.profile(max_n, max_n), ns, c.count("trials", 1000),
                                                       c.real("C_op", 3.0), c.real("C_hs", 1.0), c.seed, threads);
  std::vector<double> xs, op, hs;
  for (const auto& r : rows) {
    out.row(c.experiment_id + ".op", r.n, std::nullopt, std::nullopt, r.op_exceed.estimate, r.op_exceed.stderr,
            r.op_exceed.trials);
    out.row(c.experiment_id + ".hs", r.n, std::nullopt, std::nullopt, r.hs_exceed.estimate, r.hs_exceed.stderr,
            r.hs_exceed.trials);
    xs.push_back(static_cast<double>(r.n));
    op.push_back(r.op_exceed.estimate);
    hs.push_back(r.hs_exceed.estimate);
  }
  out.series("op", xs, op);
  out.series("hs", xs, hs);
}

}  // namespace

void run_campaign(const CampaignFile& campaign, const RunOptions& options, std::ostream& log) {
  OutputDir out(options.out_dir, campaign);
  {
    auto manifest = out.open("manifest.txt");
    manifest << "# rankprobe " << RANKPROBE_VERSION << "\n" << campaign.to_text();
    OutputDir::finish(manifest, "manifest");
  }
  switch (campaign.kind) {
    case Kind::sample:
      run_sample(campaign, out, options.threads);
      break;
    case Kind::rank_tail:
      run_rank_tail(campaign, out, options.threads, log);
      break;
    case Kind::singular_tail:
      run_singular_tail(campaign, out, options.threads, log);
      break;
    case Kind::rlcd:
      run_rlcd(campaign, out, options.threads);
      break;
    case Kind::round:
      run_round(campaign, out, options.threads);
      break;
    case Kind::ri_select:
      run_ri_select(campaign, out, options.threads);
      break;
    case Kind::tensorize:
      run_tensorize(campaign, out, options.threads);
      break;
    case Kind::norms:
      run_norms(campaign, out, options.threads);
      break;
  }
}

}  // namespace rankprobe::campaign
