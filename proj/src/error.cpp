#include "navslip/error.hpp"

namespace navslip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveWidth: return "NonPositiveWidth";
    case ErrorCode::DerivativeBoundViolated: return "DerivativeBoundViolated";
    case ErrorCode::NonMonotoneK: return "NonMonotoneK";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::BetaZero: return "BetaZero";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::JacobianNonPositive: return "JacobianNonPositive";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::JacobianSingular: return "JacobianSingular";
    case ErrorCode::ContinuationStalled: return "ContinuationStalled";
    case ErrorCode::NotStarLike: return "NotStarLike";
    case ErrorCode::IncompatibleData: return "IncompatibleData";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace navslip
