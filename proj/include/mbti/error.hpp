#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mbti {

enum class ErrorCode {
  InvalidTypeCode,
  InvalidArgument,
  Io,
  Schema,
  Capacity,
  EmptySample,
  MissingClass,
  Divergence,
  DimensionMismatch,
  LabelOutsideSpace,
  SpaceMismatch,
  Http,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the toolkit. `code()` is stable and is what the
/// CLI writes into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mbti
