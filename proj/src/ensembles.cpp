#include "rankprobe/ensembles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "rankprobe/errors.hpp"
#include "rankprobe/text.hpp"

namespace rankprobe::ensembles {

namespace {

constexpr double kWeightTolerance = 1e-12;

double sqrt3() { return std::sqrt(3.0); }

// Smallest t with f(t) <= 2, f decreasing; hi must satisfy f(hi) <= 2.
template <class F>
double bisect_psi2(F&& f, double hi) {
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) <= 2.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double uniform_psi2() {
  // (1/sqrt3) * int_0^sqrt3 exp(x^2/t^2) dx by composite Simpson.
  const auto expectation = [](double t) {
    constexpr int kIntervals = 4000;
    const double a = sqrt3();
    const double h = a / kIntervals;
    double acc = 0.0;
    for (int i = 0; i <= kIntervals; ++i) {
      const double x = i * h;
      const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * std::exp((x / t) * (x / t));
    }
    return acc * h / 3.0 / a;
  };
  return bisect_psi2(expectation, sqrt3() / std::sqrt(std::log(2.0)));
}

double parse_number(std::string_view text, std::string_view what) {
  text = text::trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid number for " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::string format(double v) { return text::format_double(v); }

}  // namespace

Moments discrete_moments(std::span<const double> atoms, std::span<const double> weights) {
  if (atoms.empty()) throw ConfigError("discrete law needs at least one atom");
  if (atoms.size() != weights.size()) throw ConfigError("discrete law: atoms and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i]) || !std::isfinite(weights[i])) throw ConfigError("discrete law: non-finite value");
    if (weights[i] < 0.0) throw ConfigError("discrete law: negative weight");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw ConfigError("discrete law: weights sum to " + format(total) + ", expected 1");
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) mean += weights[i] * atoms[i];
  double var = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) var += weights[i] * (atoms[i] - mean) * (atoms[i] - mean);
  return {mean, var};
}

DistributionLaw::DistributionLaw(LawKind kind, double p, std::vector<double> atoms, std::vector<double> weights)
    : kind_(kind), p_(p), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (kind_ == LawKind::discrete) {
    const Moments m = discrete_moments(atoms_, weights_);
    if (!(m.variance > 0.0)) throw ConfigError("discrete law has zero variance");
    const double sd = std::sqrt(m.variance);
    normalized_.reserve(atoms_.size());
    for (double a : atoms_) normalized_.push_back((a - m.mean) / sd);
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
    cumulative_.back() = 1.0;
  }
  declared_psi2_ = exact_psi2().value_or(1.0);
}

DistributionLaw DistributionLaw::rademacher() { return DistributionLaw(LawKind::rademacher, 1.0, {}, {}); }
DistributionLaw DistributionLaw::gaussian() { return DistributionLaw(LawKind::gaussian, 1.0, {}, {}); }
DistributionLaw DistributionLaw::uniform() { return DistributionLaw(LawKind::uniform, 1.0, {}, {}); }
DistributionLaw DistributionLaw::degenerate() { return DistributionLaw(LawKind::degenerate, 1.0, {}, {}); }

DistributionLaw DistributionLaw::sparse_bernoulli(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sparse-bernoulli: p must lie in (0, 1]");
  return DistributionLaw(LawKind::sparse_bernoulli, p, {}, {});
}

DistributionLaw DistributionLaw::discrete(std::vector<double> atoms, std::vector<double> weights) {
  return DistributionLaw(LawKind::discrete, 1.0, std::move(atoms), std::move(weights));
}

DistributionLaw DistributionLaw::with_declared_psi2(double psi2) const {
  if (!(std::isfinite(psi2) && psi2 > 0.0)) throw ConfigError("declared psi2 must be finite and positive");
  if (const auto exact = exact_psi2(); exact && psi2 < *exact * (1.0 - 1e-12)) {
    throw ConfigError("declared psi2 " + format(psi2) + " is below the law's exact psi2 " + format(*exact));
  }
  DistributionLaw copy = *this;
  copy.declared_psi2_ = psi2;
  return copy;
}

std::optional<std::vector<Atom>> DistributionLaw::support() const {
  switch (kind_) {
    case LawKind::rademacher:
      return std::vector<Atom>{{-1.0, 0.5}, {1.0, 0.5}};
    case LawKind::sparse_bernoulli: {
      const double a = 1.0 / std::sqrt(p_);
      if (p_ == 1.0) return std::vector<Atom>{{-a, 0.5}, {a, 0.5}};
      return std::vector<Atom>{{-a, 0.5 * p_}, {0.0, 1.0 - p_}, {a, 0.5 * p_}};
    }
    case LawKind::discrete: {
      std::vector<Atom> out;
      out.reserve(atoms_.size());
      for (std::size_t i = 0; i < atoms_.size(); ++i) out.push_back({normalized_[i], weights_[i]});
      return out;
    }
    case LawKind::degenerate:
      return std::vector<Atom>{{0.0, 1.0}};
    case LawKind::gaussian:
    case LawKind::uniform:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::vector<Atom>> DistributionLaw::symmetrized_support() const {
  const auto base = support();
  if (!base) return std::nullopt;
  std::vector<Atom> diffs;
  diffs.reserve(base->size() * base->size());
  for (const Atom& a : *base) {
    for (const Atom& b : *base) diffs.push_back({a.value - b.value, a.weight * b.weight});
  }
  std::sort(diffs.begin(), diffs.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });
  std::vector<Atom> merged;
  for (const Atom& d : diffs) {
    if (d.weight == 0.0) continue;
    if (!merged.empty() && std::abs(merged.back().value - d.value) <= 1e-12 * std::max(1.0, std::abs(d.value))) {
      merged.back().weight += d.weight;
    } else {
      merged.push_back(d);
    }
  }
  return merged;
}

std::optional<double> DistributionLaw::exact_psi2() const {
  switch (kind_) {
    case LawKind::rademacher:
      return 1.0 / std::sqrt(std::log(2.0));
    case LawKind::gaussian:
      return std::sqrt(8.0 / 3.0);
    case LawKind::uniform: {
      static const double value = uniform_psi2();
      return value;
    }
    case LawKind::sparse_bernoulli:
      return 1.0 / std::sqrt(p_ * std::log1p(1.0 / p_));
    case LawKind::discrete: {
      const auto atoms = *support();
      double amax = 0.0;
      for (const Atom& a : atoms) amax = std::max(amax, std::abs(a.value));
      const auto expectation = [&](double t) {
        double acc = 0.0;
        for (const Atom& a : atoms) acc += a.weight * std::exp((a.value / t) * (a.value / t));
        return acc;
      };
      return bisect_psi2(expectation, amax / std::sqrt(std::log(2.0)));
    }
    case LawKind::degenerate:
      return std::nullopt;
  }
  return std::nullopt;
}

double DistributionLaw::sup_abs() const {
  switch (kind_) {
    case LawKind::gaussian:
      return std::numeric_limits<double>::infinity();
    case LawKind::uniform:
      return sqrt3();
    default: {
      double m = 0.0;
      for (const Atom& a : *support()) m = std::max(m, std::abs(a.value));
      return m;
    }
  }
}

std::string DistributionLaw::to_string() const {
  std::string out;
  switch (kind_) {
    case LawKind::rademacher:
      out = "rademacher";
      break;
    case LawKind::gaussian:
      out = "gaussian";
      break;
    case LawKind::uniform:
      out = "uniform";
      break;
    case LawKind::sparse_bernoulli:
      out = "sparse-bernoulli(" + format(p_) + ")";
      break;
    case LawKind::discrete: {
      out = "discrete(";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i > 0) out += ";";
        out += format(atoms_[i]) + ":" + format(weights_[i]);
      }
      out += ")";
      break;
    }
    case LawKind::degenerate:
      out = "degenerate";
      break;
  }
  const auto exact = exact_psi2();
  if (!exact || declared_psi2_ != *exact) out += "@" + format(declared_psi2_);
  return out;
}

DistributionLaw DistributionLaw::parse(std::string_view text) {
  text = text::trim(text);
  std::optional<double> declared;
  if (const auto at = text.rfind('@'); at != std::string_view::npos) {
    declared = parse_number(text.substr(at + 1), "declared psi2");
    text = text::trim(text.substr(0, at));
  }
  const auto open = text.find('(');
  const std::string_view name = text::trim(text.substr(0, open));
  std::string_view args;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw ConfigError("unterminated argument list in law '" + std::string(text) + "'");
    args = text.substr(open + 1, text.size() - open - 2);
  }
  const auto no_args = [&] {
    if (open != std::string_view::npos) throw ConfigError("law '" + std::string(name) + "' takes no arguments");
  };

  DistributionLaw law = rademacher();
  if (name == "rademacher") {
    no_args();
  } else if (name == "gaussian") {
    no_args();
    law = gaussian();
  } else if (name == "uniform") {
    no_args();
    law = uniform();
  } else if (name == "sparse-bernoulli") {
    if (open == std::string_view::npos) throw ConfigError("sparse-bernoulli needs a parameter p");
    law = sparse_bernoulli(parse_number(args, "sparse-bernoulli p"));
  } else if (name == "discrete") {
    if (open == std::string_view::npos) throw ConfigError("discrete needs atoms");
    std::vector<double> atoms;
    std::vector<double> weights;
    for (std::string_view item : text::split(args, ';')) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw ConfigError("discrete atom '" + std::string(item) + "' lacks ':'");
      atoms.push_back(parse_number(item.substr(0, colon), "atom"));
      weights.push_back(parse_number(item.substr(colon + 1), "weight"));
    }
    law = discrete(std::move(atoms), std::move(weights));
  } else {
    throw ConfigError("unknown law '" + std::string(name) + "'");
  }
  if (declared) law = law.with_declared_psi2(*declared);
  return law;
}

double sample_entry(const DistributionLaw& law, RandomStream& stream) {
  switch (law.kind()) {
    case LawKind::rademacher:
      return (stream.next_u64() >> 63) ? 1.0 : -1.0;
    case LawKind::gaussian:
      return stream.normal();
    case LawKind::uniform:
      return (2.0 * stream.uniform() - 1.0) * sqrt3();
    case LawKind::sparse_bernoulli: {
      const double u = stream.uniform();
      const double p = law.sparsity();
      if (u < 0.5 * p) return 1.0 / std::sqrt(p);
      if (u < p) return -1.0 / std::sqrt(p);
      return 0.0;
    }
    case LawKind::discrete: {
      const auto cumulative = law.cumulative_weights();
      const double u = stream.uniform();
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
      return law.normalized_atoms()[idx];
    }
    case LawKind::degenerate:
      return 0.0;
  }
  return 0.0;
}

double sample_symmetrized(const DistributionLaw& law, RandomStream& stream) {
  const double x = sample_entry(law, stream);
  const double x_prime = sample_entry(law, stream);
  return x - x_prime;
}

double paley_zygmund_floor(double K) {
  if (!(K >= 1.0) || !std::isfinite(K)) throw DomainError("paley_zygmund_floor: K must be a finite value >= 1");
  const double k2 = K * K;
  return 1.0 / (6.0 + 4.0 * k2 * k2);
}

double psi2_from_samples(std::span<const double> samples) {
  if (samples.empty()) throw EstimationError("psi2 estimate needs samples");
  if (std::all_of(samples.begin(), samples.end(), [](double x) { return x == 0.0; })) return 0.0;
  const auto mean_exp = [&](double t) {
    double acc = 0.0;
    for (double x : samples) acc += std::exp((x / t) * (x / t));
    return acc / static_cast<double>(samples.size());
  };
  constexpr double kCap = 100.0;
  if (!(mean_exp(kCap) <= 2.0)) {
    throw EstimationError("psi2 bisection did not converge: empirical mean of exp((X/t)^2) exceeds 2 at t = 100");
  }
  double lo = 0.0;
  double hi = kCap;
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mean_exp(mid) <= 2.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double psi2_estimate(const DistributionLaw& law, std::size_t n_samples, RandomStream& stream) {
  if (n_samples < 1000) throw DomainError("psi2_estimate needs at least 1000 samples");
  std::vector<double> draws(n_samples);
  for (double& d : draws) d = sample_entry(law, stream);
  return psi2_from_samples(draws);
}

EntryProfile::EntryProfile(std::size_t rows, std::size_t cols, DistributionLaw law, double K_cap)
    : EntryProfile(rows, cols, std::vector<LawRule>{{std::nullopt, std::nullopt, std::move(law)}}, K_cap) {}

EntryProfile::EntryProfile(std::size_t rows, std::size_t cols, const std::vector<LawRule>& rules, double K_cap)
    : rows_(rows), cols_(cols), K_cap_(K_cap), rules_(rules) {
  build();
}

void EntryProfile::build() {
  if (rows_ == 0 || cols_ == 0) throw ConfigError("profile shape must be positive");
  if (!(std::isfinite(K_cap_) && K_cap_ > 0.0)) throw ConfigError("K_cap must be finite and positive");
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  palette_.clear();
  index_.assign(rows_ * cols_, kUnset);
  for (const LawRule& rule : rules_) {
    if (rule.row && *rule.row >= rows_) throw ConfigError("law rule row " + std::to_string(*rule.row) + " out of range");
    if (rule.col && *rule.col >= cols_) throw ConfigError("law rule column " + std::to_string(*rule.col) + " out of range");
    if (rule.law.declared_psi2() > K_cap_) {
      throw ConfigError("law " + rule.law.to_string() + " has declared psi2 " + format(rule.law.declared_psi2()) +
                        " above K_cap " + format(K_cap_));
    }
    auto it = std::find(palette_.begin(), palette_.end(), rule.law);
    const std::size_t id = static_cast<std::size_t>(it - palette_.begin());
    if (it == palette_.end()) palette_.push_back(rule.law);
    const std::size_t r0 = rule.row.value_or(0), r1 = rule.row ? *rule.row + 1 : rows_;
    const std::size_t c0 = rule.col.value_or(0), c1 = rule.col ? *rule.col + 1 : cols_;
    for (std::size_t i = r0; i < r1; ++i) {
      for (std::size_t j = c0; j < c1; ++j) index_[i * cols_ + j] = id;
    }
  }
  for (std::size_t c = 0; c < index_.size(); ++c) {
    if (index_[c] == kUnset) {
      throw ConfigError("profile entry (" + std::to_string(c / cols_) + "," + std::to_string(c % cols_) +
                        ") has no law");
    }
  }
}

bool EntryProfile::bounded_by_one() const {
  for (std::size_t c = 0; c < index_.size(); ++c) {
    if (palette_[index_[c]].sup_abs() > 1.0 + 1e-12) return false;
  }
  return true;
}

EntryProfile EntryProfile::resized(std::size_t rows, std::size_t cols) const {
  return EntryProfile(rows, cols, rules_, K_cap_);
}

LawRule parse_law_rule(std::string_view key_suffix, std::string_view value, std::size_t line) {
  const auto parts = text::split(key_suffix, '.');
  if (parts.size() != 2) throw ParseError(line, "law key must look like law.<row|*>.<col|*>");
  const auto index = [&](std::string_view s) -> std::optional<std::size_t> {
    s = text::trim(s);
    if (s == "*") return std::nullopt;
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(line, "bad law index '" + std::string(s) + "'");
    }
    return v;
  };
  try {
    return LawRule{index(parts[0]), index(parts[1]), DistributionLaw::parse(value)};
  } catch (const ConfigError& e) {
    throw ParseError(line, e.what());
  }
}

std::string law_rule_key(const LawRule& rule) {
  const auto idx = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("*"); };
  return "law." + idx(rule.row) + "." + idx(rule.col);
}

EntryProfile parse_profile(std::string_view text) {
  std::optional<std::size_t> rows, cols;
  double K_cap = 0.0;
  bool have_cap = false;
  std::vector<LawRule> rules;
  for (const text::KeyValueLine& kv : text::parse_key_values(text)) {
    if (kv.key == "rows" || kv.key == "cols") {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
      if (ec != std::errc() || ptr != kv.value.data() + kv.value.size() || v == 0) {
        throw ParseError(kv.line, "'" + kv.key + "' must be a positive integer");
      }
      (kv.key == "rows" ? rows : cols) = v;
    } else if (kv.key == "K_cap") {
      try {
        K_cap = parse_number(kv.value, "K_cap");
      } catch (const ConfigError& e) {
        throw ParseError(kv.line, e.what());
      }
      have_cap = true;
    } else if (kv.key.starts_with("law.")) {
      rules.push_back(parse_law_rule(std::string_view(kv.key).substr(4), kv.value, kv.line));
    } else {
      throw ParseError(kv.line, "unknown key '" + kv.key + "'");
    }
  }
  if (!rows || !cols) throw ParseError(0, "profile needs rows and cols");
  if (!have_cap) throw ParseError(0, "profile needs K_cap");
  return EntryProfile(*rows, *cols, rules, K_cap);
}

std::string profile_to_text(const EntryProfile& profile) {
  std::string out;
  out += "rows = " + std::to_string(profile.rows()) + "\n";
  out += "cols = " + std::to_string(profile.cols()) + "\n";
  out += "K_cap = " + format(profile.K_cap()) + "\n";
  for (const LawRule& rule : profile.rules()) out += law_rule_key(rule) + " = " + rule.law.to_string() + "\n";
  return out;
}

Matrix sample_matrix(const EntryProfile& profile, RandomStream& stream) {
  Matrix m(profile.rows(), profile.cols());
  for (std::size_t i = 0; i < profile.rows(); ++i) {
    for (std::size_t j = 0; j < profile.cols(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sample_entry(profile.law(i, j), stream);
    }
  }
  return m;
}

}  // namespace rankprobe::ensembles
