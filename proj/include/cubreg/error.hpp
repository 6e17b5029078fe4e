#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cubreg {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  NotSymmetric,
  NoConvergence,
  ExcitedSingularMode,
  Inconsistent,
  PoleEvaluation,
  NormMismatch,
  CertificateFailure,
  NotStationary,
  NonNegativeCurvature,
  ThresholdNotMet,
  BoundExceeded,
  ToleranceFloor,
  EmptyInput,
  Schema,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ExcitedSingularMode: return "ExcitedSingularMode";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::PoleEvaluation: return "PoleEvaluation";
    case ErrorCode::NormMismatch: return "NormMismatch";
    case ErrorCode::CertificateFailure: return "CertificateFailure";
    case ErrorCode::NotStationary: return "NotStationary";
    case ErrorCode::NonNegativeCurvature: return "NonNegativeCurvature";
    case ErrorCode::ThresholdNotMet: return "ThresholdNotMet";
    case ErrorCode::BoundExceeded: return "BoundExceeded";
    case ErrorCode::ToleranceFloor: return "ToleranceFloor";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Schema: return "Schema";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI exit-code mapping) can branch without parsing
/// message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

/// Raised by shifted solves when a singular mode is excited by the right-hand side.
class SingularModeError : public Error {
 public:
  SingularModeError(long index, const std::string& what)
      : Error(ErrorCode::ExcitedSingularMode, what), index_(index) {}

  long index() const noexcept { return index_; }

 private:
  long index_;
};

}  // namespace cubreg
