#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rankprobe::text {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

struct KeyValueLine {
  std::size_t line;
  std::string key;
  std::string value;
};

/// One `key = value` per line; `#` starts a comment, blank lines are
/// skipped. Throws ParseError naming the line for anything else.
std::vector<KeyValueLine> parse_key_values(std::string_view text);

/// Shortest round-trippable decimal form of v.
std::string format_double(double v);

}  // namespace rankprobe::text
