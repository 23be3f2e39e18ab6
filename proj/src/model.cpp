#include "hgm/model.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "hgm/errors.hpp"

namespace hgm {

void ModelParams::validate() const {
  if (sigma2.empty()) {
    throw Error(ErrorCode::InvalidArgument, "dimension must be at least 1");
  }
  if (mu.size() != sigma2.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "mu has " + std::to_string(mu.size()) + " entries, expected " +
                    std::to_string(sigma2.size()));
  }
  for (std::size_t i = 0; i < sigma2.size(); ++i) {
    if (!std::isfinite(sigma2[i]) || !std::isfinite(mu[i])) {
      throw Error(ErrorCode::NonFinite, "non-finite parameter at index " + std::to_string(i));
    }
    if (sigma2[i] <= 0.0) {
      throw Error(ErrorCode::NonPositiveVariance,
                  "sigma2[" + std::to_string(i) + "] must be positive");
    }
  }
}

double prefactor_log(const std::vector<double>& lambda, const std::vector<double>& tau) {
  const double d = static_cast<double>(lambda.size());
  double acc = -0.5 * d * std::log(std::numbers::pi);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    acc += 0.5 * std::log(-lambda[i]) + 0.25 * tau[i] * tau[i] / lambda[i];
  }
  return acc;
}

NaturalParams to_natural(const ModelParams& params) {
  params.validate();
  const std::size_t d = params.dim();
  std::vector<double> lam(d), tau(d);
  for (std::size_t i = 0; i < d; ++i) {
    lam[i] = -1.0 / (2.0 * params.sigma2[i]);
    tau[i] = params.mu[i] / params.sigma2[i];
  }

  NaturalParams np;
  np.perm.resize(d);
  std::iota(np.perm.begin(), np.perm.end(), std::size_t{0});
  std::stable_sort(np.perm.begin(), np.perm.end(), [&](std::size_t a, std::size_t b) {
    if (lam[a] != lam[b]) return lam[a] > lam[b];
    return std::abs(tau[a]) > std::abs(tau[b]);
  });
  np.lambda.resize(d);
  np.tau.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    np.lambda[k] = lam[np.perm[k]];
    np.tau[k] = tau[np.perm[k]];
  }
  np.prefactor_log = prefactor_log(np.lambda, np.tau);
  if (!std::isfinite(np.prefactor_log)) {
    throw Error(ErrorCode::NonFinite, "normalizing prefactor is not finite");
  }
  return np;
}

ModelParams from_natural(const NaturalParams& np) {
  const std::size_t d = np.dim();
  ModelParams p;
  p.sigma2.resize(d);
  p.mu.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double s2 = -1.0 / (2.0 * np.lambda[k]);
    p.sigma2[np.perm[k]] = s2;
    p.mu[np.perm[k]] = np.tau[k] * s2;
  }
  return p;
}

NaturalParams natural_from(std::vector<double> lambda, std::vector<double> tau) {
  if (lambda.size() != tau.size() || lambda.empty()) {
    throw Error(ErrorCode::InvalidArgument, "lambda and tau must be nonempty and equal length");
  }
  NaturalParams np;
  np.perm.resize(lambda.size());
  std::iota(np.perm.begin(), np.perm.end(), std::size_t{0});
  const bool negative = std::all_of(lambda.begin(), lambda.end(), [](double l) { return l < 0.0; });
  np.prefactor_log = negative ? prefactor_log(lambda, tau) : std::numeric_limits<double>::quiet_NaN();
  np.lambda = std::move(lambda);
  np.tau = std::move(tau);
  return np;
}

double log_surface_area(int d) {
  const double half = 0.5 * d;
  return std::log(2.0) + half * std::log(std::numbers::pi) - std::lgamma(half);
}

double surface_area(int d) {
  return std::exp(log_surface_area(d));
}

}  // namespace hgm
