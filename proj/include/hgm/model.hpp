#pragma once

// Parameters of the normal distribution N(mu, diag(sigma2)) and the
// Fisher-Bingham parameters (lambda, tau) derived from them.
//
// A nondiagonal covariance is handled outside the library: rotate x by the
// eigenbasis of Sigma (which leaves ||x|| unchanged), rotate mu the same
// way, and pass the eigenvalues as sigma2.

#include <cstddef>
#include <vector>

namespace hgm {

struct ModelParams {
  std::vector<double> sigma2;
  std::vector<double> mu;

  std::size_t dim() const noexcept { return sigma2.size(); }

  /// Throws NonFinite / NonPositiveVariance / InvalidArgument.
  void validate() const;
};

/// Fisher-Bingham parameters in canonical order: lambda nonincreasing so
/// that lambda[0] is the largest (least negative) entry.
struct NaturalParams {
  std::vector<double> lambda;
  std::vector<double> tau;
  /// perm[k] is the user-order index of canonical coordinate k.
  std::vector<std::size_t> perm;
  /// log( prod sqrt(-lambda_i) * pi^(-d/2) * exp(sum tau_i^2 / (4 lambda_i)) ).
  double prefactor_log = 0.0;

  std::size_t dim() const noexcept { return lambda.size(); }
};

/// lambda_i = -1/(2 sigma_i^2), tau_i = mu_i / sigma_i^2, then sorted by
/// lambda descending, |tau| descending, original index ascending.
NaturalParams to_natural(const ModelParams& params);

/// Inverse of to_natural, including the permutation back to user order.
ModelParams from_natural(const NaturalParams& np);

/// Builds NaturalParams directly from (lambda, tau) given in canonical
/// order, with identity permutation. lambda need not be negative; the
/// prefactor is only meaningful when it is.
NaturalParams natural_from(std::vector<double> lambda, std::vector<double> tau);

/// Log of the normalizing prefactor for strictly negative lambda.
double prefactor_log(const std::vector<double>& lambda, const std::vector<double>& tau);

/// Area of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
double surface_area(int d);
double log_surface_area(int d);

}  // namespace hgm
