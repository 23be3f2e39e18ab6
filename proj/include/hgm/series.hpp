#pragma once

// Power series of the Fisher-Bingham integral about r = 0 and the
// leading-term seed used to start the ODE integration.

#include <vector>

#include "hgm/model.hpp"

namespace hgm {

struct SeriesOptions {
  int max_total_degree = 30;  ///< cap on |alpha| + |beta|
  double rel_tol = 1e-13;     ///< shell truncation tolerance
};

/// r0^{-(d+1)} F at r0 from the first term of the series:
/// (S tau_1 / d, ..., S tau_d / d, S / d, ..., S / d), S = |S^{d-1}|.
/// The caller carries (d+1) log r0 in its ledger.
std::vector<double> leading_initial_state(const NaturalParams& np, double r0);

/// f and its 2d derivatives, ordered (df/dtau_1..d, df/dlambda_1..d).
struct SeriesValue {
  double f = 0.0;
  std::vector<double> grad;
};

/// Partial sums of the series in total-degree shells until the last shell
/// is below rel_tol relative to every component. Practical for r <= 1.
/// Throws NoConvergence when max_total_degree is reached first.
SeriesValue series_f_and_gradient(const NaturalParams& np, double r,
                                  const SeriesOptions& opts = {});

}  // namespace hgm
