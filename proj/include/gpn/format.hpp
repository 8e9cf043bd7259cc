#pragma once

#include <cstdio>
#include <string>

namespace gpn {

// Shortest-safe decimal form that parses back to the same double.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace gpn
