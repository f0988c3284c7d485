#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nvsim::util {

class ParseError final : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what);
  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const noexcept;
};

/// Reads `[section]` headers followed by `key=value` lines. `#` and `;` start
/// comments; blank lines are ignored; sections may repeat. Entries before the
/// first header are a parse error.
std::vector<Section> parse_sections(std::istream& in, const std::string& source);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Strict numeric conversions; throw std::invalid_argument on trailing junk.
long long to_int(std::string_view s);
unsigned long long to_uint(std::string_view s);
double to_double(std::string_view s);
bool to_bool(std::string_view s);

}  // namespace nvsim::util
