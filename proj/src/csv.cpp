#include "qtunnel/csv.hpp"

#include <cstdio>

namespace qtunnel {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace qtunnel
