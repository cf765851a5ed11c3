#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mbr {

enum class ErrorCode {
  AllZero,
  NegativeMass,
  InvalidDistribution,
  BadIndex,
  ZeroConditioningMass,
  SupportMismatch,
  MeanOutOfRange,
  PolicyUndefined,
  ZeroLikelihood,
  BudgetExceeded,
  NotApplicable,
  NotStatic,
  NotPartialFeedback,
  LipschitzViolated,
  RewardRangeViolated,
  NegativeKL,
  InvalidMetric,
  ParseError,
  ValidationError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mbr
