#pragma once

// Campaign files: a flat `key = value` description of one experiment, and
// the runner that turns it into a results table, a manifest and plot data.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rankprobe/ensembles.hpp"
#include "rankprobe/text.hpp"

namespace rankprobe::campaign {

enum class Kind { sample, rank_tail, singular_tail, rlcd, round, ri_select, tensorize, norms };

std::string_view kind_name(Kind kind) noexcept;
std::optional<Kind> parse_kind(std::string_view name) noexcept;

/// Keys accepted for a kind besides kind, id, seed, K_cap and law.*.
const std::vector<std::string_view>& kind_keys(Kind kind);

class CampaignFile {
 public:
  Kind kind;
  std::string experiment_id;
  std::uint64_t seed;
  double K_cap;
  std::vector<ensembles::LawRule> laws;
  /// Kind-specific settings in file order.
  std::vector<text::KeyValueLine> settings;

  bool has(std::string_view key) const;
  std::string text(std::string_view key, std::string_view fallback) const;
  double real(std::string_view key, double fallback) const;
  std::optional<double> optional_real(std::string_view key) const;
  std::size_t count(std::string_view key, std::size_t fallback) const;
  bool flag(std::string_view key, bool fallback) const;
  std::vector<double> reals(std::string_view key, std::vector<double> fallback) const;
  std::vector<std::size_t> counts(std::string_view key, std::vector<std::size_t> fallback) const;

  /// Profile of the given shape built from the law rules.
  ensembles::EntryProfile profile(std::size_t rows, std::size_t cols) const;

  /// Canonical text; parse_campaign(to_text()) yields an equal campaign.
  std::string to_text() const;

 private:
  const text::KeyValueLine* find(std::string_view key) const;
};

/// Parses and validates a campaign. `kind` may be omitted from the file
/// when `expected` is given; when both are present they must agree. Every
/// value is type-checked here, so a successful parse cannot fail later on
/// a malformed number. Throws ParseError naming the offending line (line 0
/// for a missing key) or ConfigError for an invalid law profile.
CampaignFile parse_campaign(std::string_view text, std::optional<Kind> expected = std::nullopt);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
};

/// Writes manifest.txt, results.csv and plot files into out_dir. results.csv
/// is truncated at the start and flushed row by row, so rows written before
/// an error survive. Throws IoError if the directory cannot be written;
/// module errors propagate.
void run_campaign(const CampaignFile& campaign, const RunOptions& options, std::ostream& log);

inline constexpr std::string_view kResultsHeader = "experiment_id,n,k,epsilon,estimate,stderr,trials,master_seed";

}  // namespace rankprobe::campaign
