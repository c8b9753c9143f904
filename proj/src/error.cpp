#include "fusioncurve/error.hpp"

namespace fusioncurve {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::BadArmCode: return "BadArmCode";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::EmptyArm: return "EmptyArm";
    case ErrorCode::HorizonExceedsData: return "HorizonExceedsData";
    case ErrorCode::AllBridgingDropped: return "AllBridgingDropped";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::Nonconvergence: return "Nonconvergence";
    case ErrorCode::CellTooSmall: return "CellTooSmall";
    case ErrorCode::NoBridgingRows: return "NoBridgingRows";
    case ErrorCode::NoArmRows: return "NoArmRows";
    case ErrorCode::NoHistoricalApprovedRows: return "NoHistoricalApprovedRows";
    case ErrorCode::FoldMismatch: return "FoldMismatch";
    case ErrorCode::CauseOutOfRange: return "CauseOutOfRange";
    case ErrorCode::PositivityViolated: return "PositivityViolated";
    case ErrorCode::GridBeyondHorizon: return "GridBeyondHorizon";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DenominatorNearZero: return "DenominatorNearZero";
    case ErrorCode::InsufficientEvents: return "InsufficientEvents";
  }
  return "Unknown";
}

}  // namespace fusioncurve
