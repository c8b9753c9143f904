#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fusioncurve {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MissingColumn,
  MissingValue,
  BadValue,
  BadArmCode,
  NonPositiveTime,
  EmptyArm,
  HorizonExceedsData,
  AllBridgingDropped,
  Separation,
  RankDeficient,
  TooFewRows,
  NoEvents,
  Nonconvergence,
  CellTooSmall,
  NoBridgingRows,
  NoArmRows,
  NoHistoricalApprovedRows,
  FoldMismatch,
  CauseOutOfRange,
  PositivityViolated,
  GridBeyondHorizon,
  DegenerateVariance,
  DenominatorNearZero,
  InsufficientEvents,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fusioncurve
