#pragma once

// Plain-text "key = value" configuration files. '#' starts a comment; blank
// lines are ignored; later keys override earlier ones.

#include <string>
#include <utility>
#include <vector>

#include "earlywarn/errors.hpp"
#include "earlywarn/text.hpp"

namespace earlywarn {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = line;
    if (const auto hash = t.find('#'); hash != std::string_view::npos) t = t.substr(0, hash);
    t = text::trim(t);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const auto key = text::trim(t.substr(0, eq));
    const auto value = text::trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

inline KeyValues load_key_values(const std::string& path) {
  auto in = text::open_for_read(path);
  return parse_key_values(in, path);
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (auto part : text::split(value, ',')) {
    const auto x = text::parse_double(part);
    if (!x) throw ConfigError("key '" + key + "': malformed number in '" + value + "'");
    out.push_back(*x);
  }
  return out;
}

}  // namespace earlywarn
