#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

namespace eville {

/// Shortest round-trip text for a double; integral values below 1e15 print
/// without exponent or decimal point ("1000000", not "1e+06").
inline std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<std::int64_t>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace eville
