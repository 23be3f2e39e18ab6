#pragma once

// Two-phase holonomic-gradient integration of the ball probability
//   G(R) = P(||X|| <= R),  X ~ N(mu, diag(sigma2)).
//
// The 2d-vector F is seeded at r0 from the leading series term, carried to
// switch_radius by dF/dr = P_r F, then converted to the gauge Q and carried
// on to R. The integral of f rides along as one extra ODE component, and
// every mantissa shares a log-magnitude ledger that absorbs rescalings.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hgm/rk8pd.hpp"
#include "hgm/model.hpp"
#include "hgm/pfaffian.hpp"

namespace hgm {

struct SolveOptions {
  double r0 = 1e-6;
  double switch_radius = 1.0;
  double rel_tol = 1e-6;
  double abs_tol = 1e-6;
  /// Mantissa ceiling; the floor is its reciprocal.
  double rescale_high = 1e100;
  std::size_t max_steps = 50'000'000;
  /// Sorted radii in [r0, R] at which G is reported.
  std::vector<double> checkpoint_radii;
  /// Compute one_minus_p from the integral beyond R when p >= 0.5.
  bool complementary_tail = true;
  /// Upper limit of the tail integration; 0 means max(40, 2R).
  double far_radius = 0.0;

  void validate() const;
};

struct SolveStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rescales = 0;
  std::size_t rhs_evals = 0;
  double wall_time_s = 0.0;
};

struct Checkpoint {
  double r = 0.0;
  double G = 0.0;
};

struct BallProbResult {
  double p = 0.0;
  double one_minus_p = 1.0;
  std::vector<Checkpoint> checkpoints;
  /// (r, log f(r)) at every checkpoint and at R.
  std::vector<std::pair<double, double>> f_trace;
  /// Gauge state at R (converted from F when R <= switch_radius).
  RescaledState q_final;
  SolveStats stats;
};

struct TracePoint {
  double r = 0.0;
  SplitValue f;
  /// All 2d derivatives in canonical coordinate order, split form.
  HgmState F;
  double G = 0.0;
};

/// Multiplies vec and integral_mantissa by exp(-shift) and adds shift to
/// the ledger. The represented values are unchanged.
HgmState rescale(HgmState s, double shift);
RescaledState rescale(RescaledState s, double shift);

/// Stateful forward integrator. Radii only move forward.
class HgmPropagator {
 public:
  HgmPropagator(NaturalParams np, SolveOptions opts);

  void advance_to(double r);

  double radius() const noexcept { return r_; }
  bool in_gauge_phase() const noexcept { return gauge_phase_; }
  const NaturalParams& params() const noexcept { return np_; }
  const SolveStats& stats() const noexcept { return stats_; }

  HgmState f_state() const;
  RescaledState q_state() const;
  SplitValue f() const;
  /// Integral of f from 0 to the current radius (minus anything taken).
  SplitValue integral() const;
  /// log of prefactor * integral.
  double log_probability() const;
  /// Returns the accumulated integral and restarts accumulation from zero.
  SplitValue take_integral();

 private:
  void rhs(double r, std::span<const double> y, std::span<double> out);
  void weights(std::span<const double> y, std::span<const double> y_new, std::span<double> sc) const;
  void integrate_to(double stop);
  double initial_step(double stop);
  void enter_gauge_phase();
  void normalize(bool force);
  double integral_rhs(double r, std::span<const double> vec) const;
  double state_integral_mantissa() const;
  double ledger() const;
  SplitValue canonical(double mantissa, long pow2, double base) const;

  NaturalParams np_;
  SolveOptions opts_;
  std::size_t d_;
  double r_;
  /// The shared ledger is ledger_ + ledger_pow2_ * log 2. Rescaling only
  /// touches the integer part, which keeps results independent of when it
  /// happens.
  double ledger_ = 0.0;
  long ledger_pow2_ = 0;
  /// The integral component carries an extra factor 2^integral_exp_ on top
  /// of the shared ledger.
  long integral_exp_ = 0;
  bool gauge_phase_ = false;
  std::vector<double> y_;
  std::vector<double> k1_;
  std::vector<double> y_new_;
  bool k1_valid_ = false;
  double h_ = 0.0;
  bool last_rejected_ = false;
  Rk8pdStepper stepper_;
  StepController controller_;
  SolveStats stats_;
};

BallProbResult solve_ball_probability(const ModelParams& params, double R, const SolveOptions& opts = {});
BallProbResult solve_ball_probability(const NaturalParams& np, double R, const SolveOptions& opts = {});

std::vector<TracePoint> solve_f_trace(const ModelParams& params, std::span<const double> radii,
                                      const SolveOptions& opts = {});
std::vector<TracePoint> solve_f_trace(const NaturalParams& np, std::span<const double> radii,
                                      const SolveOptions& opts = {});

}  // namespace hgm
