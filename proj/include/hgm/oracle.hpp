#pragma once

// Reference values independent of the HGM solver: Monte Carlo, direct
// sphere quadrature for d <= 3, and two closed-form families.

#include <cstdint>
#include <vector>

#include "hgm/model.hpp"

namespace hgm {

struct McOptions {
  std::uint64_t n_samples = 10'000'000;
  std::uint64_t seed = 1;
  bool antithetic = false;
  /// Worker threads; 0 uses the hardware concurrency. The estimate does not
  /// depend on this value.
  unsigned threads = 0;
};

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Fraction of draws of N(mu, diag(sigma2)) with ||x|| <= R.
///
/// Samples are split into a fixed number of shards. Shard k uses
/// std::mt19937_64 seeded with splitmix64(seed + k), and normals come from
/// the Box-Muller transform on 53-bit uniforms.
McEstimate mc_ball_probability(const ModelParams& params, double R, const McOptions& opts = {});

/// Fisher-Bingham integral f(lambda, tau, r) over the sphere of radius r,
/// by adaptive quadrature. Only d <= 3.
double quad_fisher_bingham(const NaturalParams& np, double r);

/// (df/dtau_1..d, df/dlambda_1..d) by the same quadrature.
std::vector<double> quad_fisher_bingham_gradient(const NaturalParams& np, double r);

/// f for identity covariance and zero mean: S_{d-1} r^{d-1} e^{-r^2/2}.
double chi_closed_form(int d, double r);

/// (1 - e^{-r^2})^n, the ball probability for sigma = 1/sqrt(2k) in pairs.
double exp_product_closed_form(int n, double r);

}  // namespace hgm
