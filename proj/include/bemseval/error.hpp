#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bemseval {

enum class ErrorKind {
  kConfig,
  kIo,
  kParse,
  kOrdering,
  kCadence,
  kSchema,
  kConflict,
  kPrecondition,
  kDomain,
  kCoverage,
  kInsufficientData,
  kInsufficientCandidates,
  kUndefinedRatio,
  kFormat,
  kRubricViolation,
  kTransport,
  kProtocol,
  kReplayMiss,
  kReviewLock,
};

std::string_view to_string(ErrorKind kind);

// True for errors caused by bad configuration, malformed input files or a
// refused review edit, as opposed to failures while the pipeline was running.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bemseval
