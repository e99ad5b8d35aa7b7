#include "mast/error.hpp"

namespace mast {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DanglingLabel: return "DanglingLabel";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::KTooLargeForRegion: return "KTooLargeForRegion";
    case ErrorCode::EmptyAffinity: return "EmptyAffinity";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NonOrthogonalPair: return "NonOrthogonalPair";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace mast
