#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace kdg {

/// Shortest round-trip decimal text for a double, always carrying a decimal
/// point or exponent ("1.0", "0.25", "1e-05"). Negative zero prints as "0.0".
inline std::string format_number(double v) {
  if (v == 0.0) return "0.0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace kdg
