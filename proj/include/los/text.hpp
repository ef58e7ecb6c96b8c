#pragma once

#include <cstdio>
#include <string>

namespace los {

// Fixed-precision float formatting. All logs and reports go through this so
// two runs of the same scenario produce byte-identical output.
inline std::string fnum(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

inline std::string inum(long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return buf;
}

inline std::string unum(unsigned long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%llu", v);
  return buf;
}

} // namespace los
