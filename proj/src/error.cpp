#include "shiftscope/error.hpp"

namespace shiftscope {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kUnsupportedArray: return "UnsupportedArray";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kSampleTooLarge: return "SampleTooLarge";
    case ErrorCode::kLabelsRequired: return "LabelsRequired";
    case ErrorCode::kInvalidSplit: return "InvalidSplit";
    case ErrorCode::kDimension: return "DimError";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kIndexPairing: return "IndexPairingError";
    case ErrorCode::kInfiniteBar: return "InfiniteBarError";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace shiftscope
