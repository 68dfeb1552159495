#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qtunnel {

enum class ErrorCode {
  InvalidGeometry,
  InvalidGrid,
  InvalidCoupling,
  InvalidValue,
  MissingExcited,
  BandEdge,
  PhaseUnresolved,
  DensityUnderflow,
  GridTooCoarse,
  NoPeak,
  ConfigIo,
  ConfigParse,
};

std::string_view to_string(ErrorCode code);

/// Base exception; every failure raised by the library carries a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Issue {
  ErrorCode code;
  std::string message;
};

/// Raised by config validation; collects every violated invariant, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const noexcept { return issues_; }
  bool has(ErrorCode code) const noexcept;

 private:
  std::vector<Issue> issues_;
};

/// Soft conditions attached to results instead of thrown.
enum Flag : unsigned {
  kNoFlags = 0,
  kDensityUnderflow = 1u << 0,
  kRatioTooLarge = 1u << 1,
  kUnreliable = 1u << 2,
};

/// Comma-free token list, e.g. "density_underflow|unreliable"; empty when no flag is set.
std::string flag_tokens(unsigned flags);

}  // namespace qtunnel
