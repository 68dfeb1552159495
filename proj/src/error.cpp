#include "qtunnel/error.hpp"

#include <algorithm>

namespace qtunnel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGeometry: return "INVALID_GEOMETRY";
    case ErrorCode::InvalidGrid: return "INVALID_GRID";
    case ErrorCode::InvalidCoupling: return "INVALID_COUPLING";
    case ErrorCode::InvalidValue: return "INVALID_VALUE";
    case ErrorCode::MissingExcited: return "MISSING_EXCITED";
    case ErrorCode::BandEdge: return "BAND_EDGE";
    case ErrorCode::PhaseUnresolved: return "PHASE_UNRESOLVED";
    case ErrorCode::DensityUnderflow: return "DENSITY_UNDERFLOW";
    case ErrorCode::GridTooCoarse: return "GRID_TOO_COARSE";
    case ErrorCode::NoPeak: return "NO_PEAK";
    case ErrorCode::ConfigIo: return "CONFIG_IO";
    case ErrorCode::ConfigParse: return "CONFIG_PARSE";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::string join_issues(const std::vector<Issue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(issue.code)) + " " + issue.message;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(issues.empty() ? ErrorCode::InvalidValue : issues.front().code, join_issues(issues)),
      issues_(std::move(issues)) {}

bool ValidationError::has(ErrorCode code) const noexcept {
  return std::any_of(issues_.begin(), issues_.end(),
                     [code](const Issue& i) { return i.code == code; });
}

std::string flag_tokens(unsigned flags) {
  std::string out;
  auto add = [&](unsigned bit, const char* token) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += token;
    }
  };
  add(kDensityUnderflow, "density_underflow");
  add(kRatioTooLarge, "ratio_too_large");
  add(kUnreliable, "unreliable");
  return out;
}

}  // namespace qtunnel
