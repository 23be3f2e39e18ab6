#include "hgm/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hgm/errors.hpp"
#include "hgm/series.hpp"

namespace hgm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

template <class State>
State rescale_impl(State s, double shift) {
  const double factor = std::exp(-shift);
  for (double& v : s.vec) v *= factor;
  s.integral_mantissa *= factor;
  s.log_scale += shift;
  return s;
}

}  // namespace

void SolveOptions::validate() const {
  if (!(r0 > 0.0) || !(switch_radius > r0)) {
    throw Error(ErrorCode::InvalidArgument, "require 0 < r0 < switch_radius");
  }
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  if (!(rescale_high > 1.0) || !std::isfinite(rescale_high)) {
    throw Error(ErrorCode::InvalidArgument, "rescale_high must be finite and > 1");
  }
  if (!std::is_sorted(checkpoint_radii.begin(), checkpoint_radii.end())) {
    throw Error(ErrorCode::InvalidArgument, "checkpoint radii must be sorted");
  }
  if (!checkpoint_radii.empty() && checkpoint_radii.front() < r0) {
    throw Error(ErrorCode::InvalidArgument, "checkpoint radii must be >= r0");
  }
}

HgmState rescale(HgmState s, double shift) { return rescale_impl(std::move(s), shift); }
RescaledState rescale(RescaledState s, double shift) { return rescale_impl(std::move(s), shift); }

HgmPropagator::HgmPropagator(NaturalParams np, SolveOptions opts)
    : np_(std::move(np)),
      opts_(std::move(opts)),
      d_(np_.dim()),
      r_(opts_.r0),
      stepper_(2 * np_.dim() + 1) {
  opts_.validate();
  if (d_ == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 1");
  const double dd = static_cast<double>(d_);
  y_ = leading_initial_state(np_, opts_.r0);
  // Seed mass: integral of S s^{d-1} over [0, r0] is S r0^d / d, which in the
  // ledger (d+1) log r0 has mantissa S / (d r0).
  y_.push_back(surface_area(static_cast<int>(d_)) / (dd * opts_.r0));
  ledger_ = (dd + 1.0) * std::log(opts_.r0);
  k1_.assign(y_.size(), 0.0);
  y_new_.assign(y_.size(), 0.0);
  normalize(true);
}

void HgmPropagator::rhs(double r, std::span<const double> y, std::span<double> out) {
  ++stats_.rhs_evals;
  const std::size_t n = 2 * d_;
  const auto vec = y.first(n);
  if (gauge_phase_) {
    apply_Q_rhs(np_, r, vec, out.first(n));
  } else {
    apply_P(np_, r, vec, out.first(n));
  }
  out[n] = integral_rhs(r, vec);
}

// f at r in units of 2^integral_exp_ times the ledger. The gauge factor is
// split into a power of two and a remainder so that nothing underflows.
double HgmPropagator::integral_rhs(double r, std::span<const double> vec) const {
  if (!gauge_phase_) return std::ldexp(f_mantissa_F(d_, r, vec), -integral_exp_);
  const double g = gauge_exponent(np_, r);
  const double gi = std::floor(g / std::numbers::ln2);
  return std::ldexp(f_mantissa_Q(d_, r, vec) * std::exp(g - gi * std::numbers::ln2),
                    static_cast<int>(static_cast<long>(gi) - integral_exp_));
}

double HgmPropagator::state_integral_mantissa() const {
  return std::ldexp(y_[2 * d_], static_cast<int>(integral_exp_));
}

double HgmPropagator::ledger() const { return ledger_ + static_cast<double>(ledger_pow2_) * std::numbers::ln2; }

// Mantissa in [1/2, 1) so that equal values give bit-identical output no
// matter how the powers of two were distributed.
SplitValue HgmPropagator::canonical(double mantissa, long pow2, double base) const {
  int e = 0;
  const double m = std::frexp(mantissa, &e);
  return {m, base + static_cast<double>(pow2 + e) * std::numbers::ln2};
}

// Tolerance scale. The vector part uses abs_tol relative to its own max norm
// and the integral is controlled relatively, so the norm is invariant under
// any common rescaling of the mantissas.
void HgmPropagator::weights(std::span<const double> y, std::span<const double> y_new,
                            std::span<double> sc) const {
  const std::size_t n = 2 * d_;
  double vnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vnorm = std::max({vnorm, std::abs(y[i]), std::abs(y_new[i])});
  }
  for (std::size_t i = 0; i < n; ++i) {
    sc[i] = opts_.abs_tol * vnorm + opts_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
  }
  sc[n] = (opts_.abs_tol + opts_.rel_tol) * std::max(std::abs(y[n]), std::abs(y_new[n]));
}

// Rescales by a power of two so the mantissa arithmetic is exact and the
// step sequence does not depend on when rescaling happens.
void HgmPropagator::normalize(bool force) {
  const std::size_t n = 2 * d_;
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(y_[i]));
  if (m > 0.0 && (force || m > opts_.rescale_high || m < 1.0 / opts_.rescale_high)) {
    const int e = std::ilogb(m);
    if (e != 0) {
      for (std::size_t i = 0; i < n; ++i) {
        y_[i] = std::ldexp(y_[i], -e);
        k1_[i] = std::ldexp(k1_[i], -e);
      }
      ledger_pow2_ += e;
      integral_exp_ -= e;
      if (!force) ++stats_.rescales;
    }
  }
  const double c = std::abs(y_[n]);
  if (c > 0x1p400 || (c > 0.0 && c < 0x1p-400)) {
    const int e = std::ilogb(c);
    y_[n] = std::ldexp(y_[n], -e);
    k1_[n] = std::ldexp(k1_[n], -e);
    integral_exp_ += e;
  }
}

double HgmPropagator::initial_step(double stop) {
  const std::size_t n = y_.size();
  std::vector<double> sc(n), y1(n), f1(n);
  weights(y_, y_, sc);
  auto wnorm = [&](const std::vector<double>& v) {
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sc[i] > 0.0) {
        acc += (v[i] / sc[i]) * (v[i] / sc[i]);
        ++used;
      }
    }
    return used ? std::sqrt(acc / static_cast<double>(used)) : 0.0;
  };
  const double span = stop - r_;
  const double d0 = wnorm(y_);
  const double d1 = wnorm(k1_);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-3 * r_ : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y_[i] + h0 * k1_[i];
  rhs(r_ + h0, y1, f1);
  for (std::size_t i = 0; i < n; ++i) f1[i] -= k1_[i];
  const double d2 = wnorm(f1) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6 * r_, h0 * 1e-3)
                                : std::pow(0.01 / dm, 1.0 / (Rk8pdStepper::kOrder + 1));
  return std::min({100.0 * h0, h1, span});
}

void HgmPropagator::integrate_to(double stop) {
  auto f = [this](double r, std::span<const double> y, std::span<double> out) { rhs(r, y, out); };
  auto w = [this](std::span<const double> y, std::span<const double> yn, std::span<double> sc) {
    weights(y, yn, sc);
  };
  if (!k1_valid_) {
    rhs(r_, y_, k1_);
    k1_valid_ = true;
  }
  if (!(h_ > 0.0)) h_ = initial_step(stop);

  while (r_ < stop) {
    if (stats_.steps + stats_.rejected >= opts_.max_steps) {
      throw Error(ErrorCode::StepBudgetExceeded,
                  "step budget exhausted at r = " + std::to_string(r_), r_);
    }
    const bool clipped = r_ + h_ >= stop;
    const double h = clipped ? stop - r_ : h_;
    if (h < 16.0 * kEps * r_) {
      throw Error(ErrorCode::StepUnderflow, "step size underflow at r = " + std::to_string(r_), r_);
    }
    const double err = stepper_.attempt(f, r_, y_, k1_, h, y_new_, w);
    if (err <= 1.0) {
      const double hn = controller_.next(h, err, last_rejected_);
      last_rejected_ = false;
      r_ = clipped ? stop : r_ + h;
      y_.swap(y_new_);
      for (double v : y_) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::OverflowUnrecoverable,
                      "non-finite state at r = " + std::to_string(r_), r_);
        }
      }
      rhs(r_, y_, k1_);
      ++stats_.steps;
      normalize(false);
      if (!std::isfinite(ledger_)) {
        throw Error(ErrorCode::OverflowUnrecoverable, "non-finite ledger", r_);
      }
      h_ = clipped ? std::max(h_, hn) : hn;
    } else {
      ++stats_.rejected;
      last_rejected_ = true;
      h_ = controller_.next(h, err, true);
    }
  }
}

void HgmPropagator::enter_gauge_phase() {
  const std::size_t n = 2 * d_;
  const double g = gauge_exponent(np_, r_);
  y_[0] /= r_;
  y_[d_] /= r_ * r_;
  const double gi = std::floor(g / std::numbers::ln2);
  y_[n] *= std::exp(g - gi * std::numbers::ln2);
  integral_exp_ += static_cast<long>(gi);
  ledger_ -= g;
  gauge_phase_ = true;
  k1_valid_ = false;
  normalize(true);
}

void HgmPropagator::advance_to(double target) {
  if (target < r_) {
    throw Error(ErrorCode::InvalidArgument, "cannot integrate backwards", r_);
  }
  while (r_ < target || (!gauge_phase_ && r_ >= opts_.switch_radius)) {
    if (!gauge_phase_ && r_ >= opts_.switch_radius) {
      enter_gauge_phase();
      continue;
    }
    const double stop = gauge_phase_ ? target : std::min(target, opts_.switch_radius);
    integrate_to(stop);
  }
}

HgmState HgmPropagator::f_state() const {
  if (gauge_phase_) return gauge_Q_to_F(np_, r_, q_state());
  const std::size_t n = 2 * d_;
  return HgmState{std::vector<double>(y_.begin(), y_.begin() + n), ledger(), state_integral_mantissa()};
}

RescaledState HgmPropagator::q_state() const {
  const std::size_t n = 2 * d_;
  if (!gauge_phase_) {
    return gauge_F_to_Q(np_, r_, HgmState{std::vector<double>(y_.begin(), y_.begin() + n), ledger(),
                                          state_integral_mantissa()});
  }
  return RescaledState{std::vector<double>(y_.begin(), y_.begin() + n), ledger(), state_integral_mantissa()};
}

SplitValue HgmPropagator::f() const {
  const std::span<const double> vec(y_.data(), 2 * d_);
  if (gauge_phase_) return canonical(f_mantissa_Q(d_, r_, vec), ledger_pow2_, ledger_ + gauge_exponent(np_, r_));
  return canonical(f_mantissa_F(d_, r_, vec), ledger_pow2_, ledger_);
}

SplitValue HgmPropagator::integral() const {
  return canonical(y_[2 * d_], ledger_pow2_ + integral_exp_, ledger_);
}

double HgmPropagator::log_probability() const { return np_.prefactor_log + integral().log_abs(); }

SplitValue HgmPropagator::take_integral() {
  const SplitValue out = integral();
  y_[2 * d_] = 0.0;
  // Restart on the scale of the current f so fresh increments are O(1).
  const std::span<const double> vec(y_.data(), 2 * d_);
  const double fm = gauge_phase_ ? f_mantissa_Q(d_, r_, vec) : f_mantissa_F(d_, r_, vec);
  if (fm != 0.0 && std::isfinite(fm)) {
    integral_exp_ = std::ilogb(fm);
    if (gauge_phase_) integral_exp_ += static_cast<long>(std::floor(gauge_exponent(np_, r_) / std::numbers::ln2));
  }
  k1_valid_ = false;
  return out;
}

BallProbResult solve_ball_probability(const ModelParams& params, double R, const SolveOptions& opts) {
  return solve_ball_probability(to_natural(params), R, opts);
}

BallProbResult solve_ball_probability(const NaturalParams& np, double R, const SolveOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  opts.validate();
  if (!(R >= opts.r0)) throw Error(ErrorCode::InvalidArgument, "R must be >= r0", R);
  if (!opts.checkpoint_radii.empty() && opts.checkpoint_radii.back() > R) {
    throw Error(ErrorCode::InvalidArgument, "checkpoint radii must not exceed R", R);
  }

  HgmPropagator prop(np, opts);
  BallProbResult out;
  auto record = [&](double r) {
    prop.advance_to(r);
    out.f_trace.emplace_back(r, prop.f().log_abs());
    return std::exp(prop.log_probability());
  };
  for (double r : opts.checkpoint_radii) out.checkpoints.push_back({r, record(r)});
  out.p = record(R);
  out.q_final = prop.q_state();

  if (out.p < 0.5 || !opts.complementary_tail) {
    out.one_minus_p = 1.0 - out.p;
  } else {
    // Tail beyond R relative to the total, accumulated on its own so that
    // no cancellation against p occurs. Segments double in length until the
    // newest one no longer changes the tail or the far radius is reached.
    const double far = opts.far_radius > 0.0 ? opts.far_radius : std::max(40.0, 2.0 * R);
    const double banked = prop.take_integral().log_abs();
    double tail = -std::numeric_limits<double>::infinity();
    double width = std::max(0.5, R / 8.0);
    double r = R;
    while (r < far) {
      r = std::min(far, r + width);
      prop.advance_to(r);
      const double inc = prop.take_integral().log_abs();
      const double prev = tail;
      tail = log_add(tail, inc);
      if (std::isfinite(prev) && inc - tail < std::log(1e-12)) break;
      if (!std::isfinite(tail) && r >= far) break;
      width *= 2.0;
    }
    out.one_minus_p = std::isfinite(tail) ? std::exp(tail - log_add(banked, tail)) : 0.0;
  }

  out.stats = prop.stats();
  out.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<TracePoint> solve_f_trace(const ModelParams& params, std::span<const double> radii,
                                      const SolveOptions& opts) {
  return solve_f_trace(to_natural(params), radii, opts);
}

std::vector<TracePoint> solve_f_trace(const NaturalParams& np, std::span<const double> radii,
                                      const SolveOptions& opts) {
  if (!std::is_sorted(radii.begin(), radii.end())) {
    throw Error(ErrorCode::InvalidArgument, "trace radii must be sorted");
  }
  HgmPropagator prop(np, opts);
  std::vector<TracePoint> out;
  out.reserve(radii.size());
  for (double r : radii) {
    if (r < opts.r0) throw Error(ErrorCode::InvalidArgument, "trace radius below r0", r);
    prop.advance_to(r);
    out.push_back({r, prop.f(), prop.f_state(), std::exp(prop.log_probability())});
  }
  return out;
}

}  // namespace hgm
