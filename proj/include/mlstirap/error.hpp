#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlstirap {

enum class ErrorCode {
  InvalidArgument,
  ZeroDetuningInSum,
  BothEnvelopesZero,
  NonSymmetricInput,
  AmbiguousTracking,
  DegenerateSums,
  NotSingleResonance,
  ToleranceNotMet,
  NormDriftExceeded,
  PreconditionViolated,
  NotProportional,
  WrongResonanceCount,
  NoCrossing,
  ParseError,
  ValidationError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroDetuningInSum: return "ZeroDetuningInSum";
    case ErrorCode::BothEnvelopesZero: return "BothEnvelopesZero";
    case ErrorCode::NonSymmetricInput: return "NonSymmetricInput";
    case ErrorCode::AmbiguousTracking: return "AmbiguousTracking";
    case ErrorCode::DegenerateSums: return "DegenerateSums";
    case ErrorCode::NotSingleResonance: return "NotSingleResonance";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::NormDriftExceeded: return "NormDriftExceeded";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotProportional: return "NotProportional";
    case ErrorCode::WrongResonanceCount: return "WrongResonanceCount";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Configuration parse failure tied to a 1-based source line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace mlstirap
