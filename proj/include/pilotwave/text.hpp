#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pilotwave {

inline constexpr int kSignificantDigits = 12;

/// Shortest-general rendering with 12 significant digits, locale independent.
std::string format_number(double value);

/// Rounds to the value that format_number would print.
double canonical_number(double value);

double parse_number(std::string_view text);
long long parse_integer(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);
/// Splits on runs of whitespace.
std::vector<std::string_view> split_ws(std::string_view text);

/// Parses "a,b" into a point.
std::pair<double, double> parse_point(std::string_view text);
std::string format_point(double x, double y);

/// Ordered "key = value" document. Lines starting with '#' are ignored.
class KeyValueText {
 public:
  static KeyValueText parse(std::string_view text);

  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;
  /// Throws ParseError when absent.
  const std::string& at(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  /// Renders each entry as "<prefix>key = value\n".
  std::string render(std::string_view line_prefix = "") const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace pilotwave
