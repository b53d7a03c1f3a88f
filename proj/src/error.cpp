#include "geocms/error.hpp"

namespace geocms {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NotASample: return "NotASample";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::DegenerateTrack: return "DegenerateTrack";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::MissingHeading: return "MissingHeading";
    case ErrorCode::BadDateTime: return "BadDateTime";
    case ErrorCode::BadJson: return "BadJson";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonIncreasingTime: return "NonIncreasingTime";
    case ErrorCode::BadFieldValue: return "BadFieldValue";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::BadQuery: return "BadQuery";
    case ErrorCode::BadAnnotation: return "BadAnnotation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::NoTemporalOverlap: return "NoTemporalOverlap";
  }
  return "Unknown";
}

}  // namespace geocms
