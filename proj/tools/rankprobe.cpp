// rankprobe: run random-matrix campaigns from key-value config files.
//
// Exit status: 0 success, 2 parse or configuration error, 3 resource
// budget exceeded, 4 I/O failure, 1 anything else.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rankprobe/campaign.hpp"
#include "rankprobe/errors.hpp"
#include "rankprobe/text.hpp"

namespace {

namespace fs = std::filesystem;
using rankprobe::campaign::Kind;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rankprobe::IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run(Kind kind, const Options& opt) {
  auto campaign = rankprobe::campaign::parse_campaign(read_file(opt.config), kind);
  if (opt.seed) campaign.seed = *opt.seed;
  rankprobe::campaign::run_campaign(campaign, {opt.out, opt.threads}, std::cerr);
  std::cerr << "wrote " << (fs::path(opt.out) / "results.csv").string() << '\n';
  return 0;
}

// Prints results.csv from an output directory as an aligned table.
int report(const Options& opt) {
  const auto path = fs::path(opt.out) / "results.csv";
  const std::string content = read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(content);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    for (auto cell : rankprobe::text::split(line, ',')) cells.emplace_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.empty() || rankprobe::text::trim(content.substr(0, content.find('\n'))) !=
                          rankprobe::campaign::kResultsHeader) {
    throw rankprobe::InputError("'" + path.string() + "' is not a results file");
  }
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line.append(width[i] + 2 - r[i].size(), ' ');
    }
    std::cout << line << '\n';
  }
  const auto manifest = fs::path(opt.out) / "manifest.txt";
  if (fs::exists(manifest)) std::cout << "\nmanifest: " << manifest.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and exact probes of rank and singular-value tails of inhomogeneous random matrices"};
  app.set_version_flag("--version", std::string("rankprobe ") + RANKPROBE_VERSION);
  app.require_subcommand(1);

  Options opt;
  struct Entry {
    Kind kind;
    const char* help;
  };
  const Entry entries[] = {
      {Kind::sample, "Sample matrices from a profile and write them with their spectra"},
      {Kind::rank_tail, "Estimate P(rank <= n - k), optionally against the exact sign-matrix oracle"},
      {Kind::singular_tail, "Estimate P(s_{n-k+1} <= eps / sqrt(n)) over an epsilon grid"},
      {Kind::rlcd, "Bracket the randomized least common denominator of a subspace"},
      {Kind::round, "Randomized rounding of a kernel frame and its guarantee report"},
      {Kind::ri_select, "Restricted-invertibility column selection certificates"},
      {Kind::tensorize, "Exact Irwin-Hall probabilities against the tensorization bound"},
      {Kind::norms, "Operator and Hilbert-Schmidt norm exceedance frequencies"},
  };
  std::optional<Kind> chosen;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(std::string(rankprobe::campaign::kind_name(e.kind)), e.help);
    sub->add_option("--config", opt.config, "Campaign file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Master seed (overrides the file)");
    sub->add_option("--threads", opt.threads, "Worker threads, 0 for all cores")->capture_default_str();
    sub->callback([&chosen, kind = e.kind] { chosen = kind; });
  }
  auto* rep = app.add_subcommand("report", "Print results.csv from an output directory");
  rep->add_option("--out", opt.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (chosen) return run(*chosen, opt);
    return report(opt);
  } catch (const rankprobe::ParseError& e) {
    std::cerr << "error: " << opt.config << ": " << e.what() << '\n';
    return 2;
  } catch (const rankprobe::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const rankprobe::ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const rankprobe::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
