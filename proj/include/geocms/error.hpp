#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geocms {

enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  NotASample,
  NoOverlap,
  DegenerateTrack,
  CoincidentPoints,
  MissingHeading,
  BadDateTime,
  BadJson,
  UnknownType,
  LengthMismatch,
  NonIncreasingTime,
  BadFieldValue,
  DuplicateId,
  NotFound,
  KindMismatch,
  BadQuery,
  BadAnnotation,
  IoError,
  CorruptStore,
  WrongKind,
  NoTemporalOverlap,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `path()` is a JSON pointer to the
/// offending member when the error comes from document parsing, empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {})
      : std::runtime_error(message), code_(code), path_(std::move(path)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace geocms
