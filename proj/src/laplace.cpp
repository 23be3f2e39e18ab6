#include "hgm/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hgm/errors.hpp"

namespace hgm {

std::string_view to_string(LaplaceBranch b) {
  switch (b) {
    case LaplaceBranch::Simple: return "simple";
    case LaplaceBranch::DegenerateTauZero: return "degenerate_tau_zero";
    case LaplaceBranch::DegenerateTauNonzero: return "degenerate_tau_nonzero";
  }
  return "unknown";
}

LaplaceClass classify(const NaturalParams& np, double tie_tol) {
  const std::size_t d = np.dim();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "empty parameter set");
  LaplaceClass c;
  c.m = 1;
  while (c.m < d && np.lambda[0] - np.lambda[c.m] <= tie_tol) ++c.m;
  if (c.m == 1) return c;
  double top = 0.0;
  double g2 = 0.0;
  for (std::size_t i = 0; i < c.m; ++i) {
    top = std::max(top, std::abs(np.tau[i]));
    g2 += np.tau[i] * np.tau[i];
  }
  c.gamma = std::sqrt(g2);
  c.branch = top <= tie_tol ? LaplaceBranch::DegenerateTauZero : LaplaceBranch::DegenerateTauNonzero;
  return c;
}

LaplaceEval asymptotic_eval(const NaturalParams& np, double r, double tie_tol) {
  if (!(r > 0.0)) throw Error(ErrorCode::SingularRadius, "radius must be positive", r);
  const LaplaceClass c = classify(np, tie_tol);
  const std::size_t d = np.dim();
  const std::size_t m = c.m;
  const double l1 = np.lambda[0];
  if (m < d && np.lambda[m - 1] - np.lambda[m] <= tie_tol) {
    throw Error(ErrorCode::GroupSeparationTooSmall, "top lambda group is not separated", r);
  }
  for (std::size_t i = 1; i < m; ++i) {
    if (np.lambda[i] != l1) {
      throw Error(ErrorCode::GroupSeparationTooSmall, "lambda values nearly tied", r);
    }
  }

  LaplaceEval out;
  out.m = m;
  out.branch = c.branch;
  out.gamma = c.gamma;
  out.dtau_ratio.assign(d, 0.0);
  out.dlambda_ratio.assign(d, 0.0);

  // Coordinates outside the top group contribute Gaussian factors.
  double rest = 0.0;
  for (std::size_t j = m; j < d; ++j) {
    const double gap = l1 - np.lambda[j];
    rest += np.tau[j] * np.tau[j] / (4.0 * gap) - 0.5 * std::log(gap);
    const double t = np.tau[j] / (2.0 * gap);
    out.dtau_ratio[j] = t;
    out.dlambda_ratio[j] = t * t + 1.0 / (2.0 * gap);
  }
  const double log_pi = std::log(std::numbers::pi);
  const double dd = static_cast<double>(d);
  const double mm = static_cast<double>(m);

  switch (c.branch) {
    case LaplaceBranch::Simple: {
      const double a = r * std::abs(np.tau[0]);
      out.log_f = 0.5 * (dd - 1.0) * log_pi + rest + r * r * l1 + a + std::log1p(std::exp(-2.0 * a));
      out.dtau_ratio[0] = r * std::tanh(r * np.tau[0]);
      out.dlambda_ratio[0] = r * r;
      break;
    }
    case LaplaceBranch::DegenerateTauZero: {
      out.log_f = (mm - 1.0) * std::log(r) + log_surface_area(static_cast<int>(m)) + r * r * l1 + rest +
                  0.5 * (dd - mm) * log_pi;
      for (std::size_t j = 0; j < m; ++j) out.dlambda_ratio[j] = r * r / mm;
      break;
    }
    case LaplaceBranch::DegenerateTauNonzero: {
      const double g = c.gamma;
      out.log_f = r * r * l1 + r * g + rest + 0.5 * (mm - 1.0) * std::log(2.0 * r / g) + 0.5 * (dd - 1.0) * log_pi;
      for (std::size_t j = 0; j < m; ++j) {
        if (np.tau[j] != 0.0) {
          out.dtau_ratio[j] = r * np.tau[j] / g;
          out.dlambda_ratio[j] = r * r * np.tau[j] * np.tau[j] / (g * g);
        } else {
          out.dlambda_ratio[j] = r / g;
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace hgm
