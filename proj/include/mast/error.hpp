#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mast {

enum class ErrorCode {
  IndexOutOfRange,
  ShapeMismatch,
  DanglingLabel,
  InvalidLabel,
  ChannelMismatch,
  KTooLarge,
  KTooLargeForRegion,
  EmptyAffinity,
  DimensionMismatch,
  NonFinite,
  NumericalFailure,
  NonOrthogonalPair,
  InvalidConfig,
  BadHeader,
  TruncatedPayload,
  UnsupportedDtype,
  IoFailure,
  InvalidManifest,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this exception; the CLI maps code()
// to a process exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace mast
