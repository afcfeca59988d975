#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace navslip {

enum class ErrorCode {
  NonPositiveWidth,
  DerivativeBoundViolated,
  NonMonotoneK,
  HorizonTooShort,
  QuadratureNotConverged,
  DegenerateWindow,
  BetaZero,
  OutsideDomain,
  SupportViolation,
  ZeroDenominator,
  JacobianNonPositive,
  RankDeficient,
  SingularSystem,
  NotConverged,
  JacobianSingular,
  ContinuationStalled,
  NotStarLike,
  IncompatibleData,
  WindowTooShort,
  HypothesisViolated,
  ConfigInvalid,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; the message names the
/// offending quantity.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace navslip
