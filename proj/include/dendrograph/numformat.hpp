#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace dendrograph {

// Nearest double with the given number of significant decimal digits; used
// for the 12-digit output convention.
inline double round_to_significant(double x, int digits = 12) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

inline std::string format_significant(double x, int digits = 12) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

}  // namespace dendrograph
