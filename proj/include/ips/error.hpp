#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ips {

enum class ErrorCode {
  // fingerprint model
  OutOfRangeRssi,
  OutOfBoundsPosition,
  EmptyReadings,
  MalformedBssid,
  MalformedRecord,
  InvalidArea,
  // distribution fitting
  UnknownReferencePoint,
  EmptyInput,
  // gpr
  SingularKernel,
  DuplicateInput,
  InsufficientData,
  EmptySparseMap,
  // localizer
  InsufficientOverlap,
  EmptyRadioMap,
  // simulator
  OutOfBounds,
  DegeneratePath,
  // service
  SessionNotFound,
  WrongState,
  ValidationFailed,
  NotTrained,
  TrainingFailed,
  // general
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. what() is "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ips
