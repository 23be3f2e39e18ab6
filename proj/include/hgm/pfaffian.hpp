#pragma once

// Right-hand sides of the Pfaffian system for the standard-monomial vector
//   F = (df/dtau_1, ..., df/dtau_d, df/dlambda_1, ..., df/dlambda_d)
// and for its large-radius gauge
//   Q = exp(-r^2 lambda_1 - r|tau_1|) (F_1/r, F_2, ..., F_{d+1}/r^2, F_{d+2}, ...),
// together with the maps between the two and the recovery of f from F.
//
// States are split-exponent: the true vector is exp(log_scale) * vec, and
// integral_mantissa shares the same ledger.

#include <cstddef>
#include <span>
#include <vector>

#include "hgm/model.hpp"

namespace hgm {

struct HgmState {
  std::vector<double> vec;
  double log_scale = 0.0;
  double integral_mantissa = 0.0;
};

struct RescaledState {
  std::vector<double> vec;
  double log_scale = 0.0;
  double integral_mantissa = 0.0;
};

/// mantissa * exp(log_scale)
struct SplitValue {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const;
  /// log |value|; -inf for a zero mantissa.
  double log_abs() const;
};

/// out = P_r v in O(d). Throws SingularRadius at r = 0.
void apply_P(const NaturalParams& np, double r, std::span<const double> v, std::span<double> out);
std::vector<double> apply_P(const NaturalParams& np, double r, std::span<const double> v);

/// P_r built entry by entry from the elementwise formulas, row-major 2d x 2d.
/// Reference for apply_P; O(d^2) memory.
std::vector<double> dense_pfaffian(const NaturalParams& np, double r);

/// out = (D^{-1} dD/dr - (2 r lambda_1 + |tau_1|) I + D P_r D^{-1}) q.
void apply_Q_rhs(const NaturalParams& np, double r, std::span<const double> q, std::span<double> out);
std::vector<double> apply_Q_rhs(const NaturalParams& np, double r, std::span<const double> q);

/// r^2 lambda_1 + r |tau_1|: the log of the factor removed by the gauge.
double gauge_exponent(const NaturalParams& np, double r);

RescaledState gauge_F_to_Q(const NaturalParams& np, double r, const HgmState& s);
HgmState gauge_Q_to_F(const NaturalParams& np, double r, const RescaledState& q);

/// f = r^{-2} sum_i df/dlambda_i, in split form.
SplitValue recover_f(const NaturalParams& np, double r, const HgmState& s);
SplitValue recover_f(const NaturalParams& np, double r, const RescaledState& q);

/// Mantissa parts of recover_f for a raw vector, sharing the vector's ledger.
/// For Q the result still has to be multiplied by exp(gauge_exponent).
double f_mantissa_F(std::size_t d, double r, std::span<const double> vec);
double f_mantissa_Q(std::size_t d, double r, std::span<const double> vec);

}  // namespace hgm
