#include "hgm/errors.hpp"

namespace hgm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularRadius: return "SingularRadius";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::StepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorCode::OverflowUnrecoverable: return "OverflowUnrecoverable";
    case ErrorCode::GroupSeparationTooSmall: return "GroupSeparationTooSmall";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, double radius)
    : std::runtime_error(what), code_(code), radius_(radius) {}

}  // namespace hgm
