#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace bellfield {

/// Locale-independent shortest form with `digits` significant digits.
inline std::string format_number(double value, int digits) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

/// Rounds to `digits` significant digits (used before JSON serialization).
inline double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value == 0.0 ? 0.0 : value;
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits);
  if (ec != std::errc{}) return value;
  double rounded = value;
  std::from_chars(buf, end, rounded);
  return rounded;
}

}  // namespace bellfield
