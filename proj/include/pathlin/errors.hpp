#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pathlin {

enum class ErrorCode {
  NoOverlap,
  NoOracle,
  OutOfInjectivityRange,
  NonFiniteState,
  GridTooCoarse,
  IllConditioned,
  ChartContinuationFailure,
  NotImmersed,
  Validation,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::NoOracle: return "NoOracle";
    case ErrorCode::OutOfInjectivityRange: return "OutOfInjectivityRange";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::ChartContinuationFailure: return "ChartContinuationFailure";
    case ErrorCode::NotImmersed: return "NotImmersed";
    case ErrorCode::Validation: return "Validation";
  }
  return "Unknown";
}

/// Base of every error raised by the library. Carries a machine-readable code
/// and, where the failure is tied to a grid node, that node's index.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> node = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), node_(node) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> node() const noexcept { return node_; }

  /// Validation problems map to CLI exit code 2, everything else is numerical.
  bool is_validation() const noexcept { return code_ == ErrorCode::Validation; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> node_;
};

#define PATHLIN_DEFINE_ERROR(Name)                                                        \
  class Name : public Error {                                                             \
   public:                                                                                \
    explicit Name(const std::string& what, std::optional<std::size_t> node = std::nullopt) \
        : Error(ErrorCode::Name, what, node) {}                                           \
  };

PATHLIN_DEFINE_ERROR(NoOverlap)
PATHLIN_DEFINE_ERROR(NoOracle)
PATHLIN_DEFINE_ERROR(OutOfInjectivityRange)
PATHLIN_DEFINE_ERROR(NonFiniteState)
PATHLIN_DEFINE_ERROR(GridTooCoarse)
PATHLIN_DEFINE_ERROR(IllConditioned)
PATHLIN_DEFINE_ERROR(ChartContinuationFailure)
PATHLIN_DEFINE_ERROR(NotImmersed)

#undef PATHLIN_DEFINE_ERROR

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCode::Validation, what) {}
};

}  // namespace pathlin
