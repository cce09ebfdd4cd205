#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace volsamp {

enum class ErrorCode {
  NonPositiveWeight,
  ShapeMismatch,
  NonFiniteEntry,
  IndexOutOfRange,
  NotPositiveSemidefinite,
  ConvergenceFailure,
  RankDeficient,
  CombinatorialBlowup,
  NoNonzeroStart,
  SpectrumTooLong,
  InvalidGrid,
  InvalidArgument,
  IoError,
  ParseError,
  UnknownStrategy,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::NoNonzeroStart: return "NoNonzeroStart";
    case ErrorCode::SpectrumTooLong: return "SpectrumTooLong";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownStrategy: return "UnknownStrategy";
  }
  return "Unknown";
}

// All library failures are reported through this type; code() is stable and
// is what callers (and the CLI exit-code mapping) should switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace volsamp
