#pragma once

// Large-r Laplace asymptotics of the Fisher-Bingham integral and its first
// derivatives. Used for diagnostics only.

#include <cstddef>
#include <string_view>
#include <vector>

#include "hgm/model.hpp"

namespace hgm {

enum class LaplaceBranch { Simple, DegenerateTauZero, DegenerateTauNonzero };

std::string_view to_string(LaplaceBranch b);

struct LaplaceClass {
  std::size_t m = 1;
  LaplaceBranch branch = LaplaceBranch::Simple;
  /// Norm of tau over the top group (0 for the simple branch).
  double gamma = 0.0;
};

/// Derivatives are given as ratios to f, in canonical coordinate order.
struct LaplaceEval {
  std::size_t m = 1;
  LaplaceBranch branch = LaplaceBranch::Simple;
  double gamma = 0.0;
  double log_f = 0.0;
  std::vector<double> dtau_ratio;
  std::vector<double> dlambda_ratio;
};

inline constexpr double kDefaultTieTol = 1e-8;

LaplaceClass classify(const NaturalParams& np, double tie_tol = kDefaultTieTol);

/// Throws GroupSeparationTooSmall when the top group is not separated from
/// the rest by more than tie_tol, or when its members are only nearly equal.
LaplaceEval asymptotic_eval(const NaturalParams& np, double r, double tie_tol = kDefaultTieTol);

}  // namespace hgm
