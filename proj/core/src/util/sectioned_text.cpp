#include "nvsim/util/sectioned_text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace nvsim::util {

ParseError::ParseError(std::string source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
      source_(std::move(source)), line_(line) {}

const Entry* Section::find(std::string_view key) const noexcept {
  for (const Entry& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<Section> parse_sections(std::istream& in, const std::string& source) {
  std::vector<Section> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view view = raw;
    if (auto c = view.find_first_of("#;"); c != std::string_view::npos) view = view.substr(0, c);
    const std::string line = trim(view);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ParseError(source, lineno, "malformed section header '" + line + "'");
      out.push_back({trim(std::string_view(line).substr(1, line.size() - 2)), lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected key=value, got '" + line + "'");
    if (out.empty()) throw ParseError(source, lineno, "key outside of any [section]");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    out.back().entries.push_back({std::move(key), trim(std::string_view(line).substr(eq + 1)), lineno});
  }
  return out;
}

long long to_int(std::string_view s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  return v;
}

unsigned long long to_uint(std::string_view s) {
  unsigned long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw std::invalid_argument("not a non-negative integer: '" + std::string(s) + "'");
  return v;
}

double to_double(std::string_view s) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw std::invalid_argument("not a number: '" + tmp + "'");
  return v;
}

bool to_bool(std::string_view s) {
  std::string v(s);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("not a boolean: '" + std::string(s) + "'");
}

}  // namespace nvsim::util
