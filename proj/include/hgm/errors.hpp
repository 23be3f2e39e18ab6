#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hgm {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveVariance,
  NonFinite,
  NoConvergence,
  SingularRadius,
  StepUnderflow,
  StepBudgetExceeded,
  OverflowUnrecoverable,
  GroupSeparationTooSmall,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. Solver failures carry the radius
/// reached when the failure occurred; other errors leave it NaN.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        double radius = std::numeric_limits<double>::quiet_NaN());

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return to_string(code_); }
  double radius() const noexcept { return radius_; }

 private:
  ErrorCode code_;
  double radius_;
};

}  // namespace hgm
