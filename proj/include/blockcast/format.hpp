#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace blockcast {

inline constexpr const char* kVersion = "0.1.0";

// Nine significant digits, the precision of every emitted float.
inline std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Rounds to the value fmt9 would print, so JSON output carries the same digits.
inline double round9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

}  // namespace blockcast
