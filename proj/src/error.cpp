#include "bark/error.hpp"

namespace bark {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingMagic: return "MissingMagic";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDegenerateBatch: return "DegenerateBatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kNoFragments: return "NoFragments";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace bark
