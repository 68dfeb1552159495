#pragma once

#include <optional>
#include <string>

namespace qtunnel {

/// 16 significant digits, locale-independent; the only float format used in output files.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

}  // namespace qtunnel
