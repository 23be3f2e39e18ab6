#include "hgm/pfaffian.hpp"

#include <cmath>
#include <limits>

#include "hgm/errors.hpp"

namespace hgm {

namespace {

void require_radius(double r) {
  if (!(r > 0.0)) {
    throw Error(ErrorCode::SingularRadius, "the Pfaffian system is singular at r = 0", r);
  }
}

void require_sizes(const NaturalParams& np, std::size_t in, std::size_t out) {
  if (in != 2 * np.dim() || out != 2 * np.dim()) {
    throw Error(ErrorCode::InvalidArgument, "state vector must have 2d components");
  }
}

}  // namespace

double SplitValue::value() const {
  return mantissa * std::exp(log_scale);
}

double SplitValue::log_abs() const {
  if (mantissa == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mantissa)) + log_scale;
}

void apply_P(const NaturalParams& np, double r, std::span<const double> v, std::span<double> out) {
  require_radius(r);
  require_sizes(np, v.size(), out.size());
  const std::size_t d = np.dim();
  const double r2 = r * r;
  double lam_sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) lam_sum += v[d + k];
  // Rows i: (2 r^2 lambda_i + 1) v_i + tau_i sum_k v_{d+k}
  // Rows d+i: r^2 tau_i v_i + (2 r^2 lambda_i + 2) v_{d+i} + sum_{k != i} v_{d+k}
  for (std::size_t i = 0; i < d; ++i) {
    const double vi = v[i];
    const double vl = v[d + i];
    out[i] = ((2.0 * r2 * np.lambda[i] + 1.0) * vi + np.tau[i] * lam_sum) / r;
    out[d + i] = (r2 * np.tau[i] * vi + (2.0 * r2 * np.lambda[i] + 2.0) * vl + (lam_sum - vl)) / r;
  }
}

std::vector<double> apply_P(const NaturalParams& np, double r, std::span<const double> v) {
  std::vector<double> out(v.size());
  apply_P(np, r, v, out);
  return out;
}

std::vector<double> dense_pfaffian(const NaturalParams& np, double r) {
  require_radius(r);
  const std::size_t d = np.dim();
  const std::size_t n = 2 * d;
  auto delta = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
  const double r2 = r * r;
  std::vector<double> p(n * n, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double lam = np.lambda[i];
    const double tau = np.tau[i];
    for (std::size_t j = 0; j < n; ++j) {
      // r p_{ij} = (2 lambda_i r^2 + 1) delta_ij + sum_k tau_i delta_{j,k+d}
      double top = (2.0 * r2 * lam + 1.0) * delta(i, j);
      for (std::size_t k = 0; k < d; ++k) top += tau * delta(j, k + d);
      // r p_{i+d,j} = tau_i r^2 delta_ij + (2 lambda_i r^2 + 2) delta_{j,i+d}
      //              + sum_{k != i} delta_{j,k+d}
      double bottom = r2 * tau * delta(i, j) + (2.0 * r2 * lam + 2.0) * delta(j, i + d);
      for (std::size_t k = 0; k < d; ++k) {
        if (k != i) bottom += delta(j, k + d);
      }
      p[i * n + j] = top / r;
      p[(i + d) * n + j] = bottom / r;
    }
  }
  return p;
}

// Conjugated and shifted system, expanded so that the O(r lambda) terms of
// slots 1 and d+1 cancel analytically:
//   slot 1:    -|tau_1| q_1 + tau_1 (q_{d+1} + T / r^2)
//   slot i:    (2r(lambda_i - lambda_1) + 1/r - |tau_1|) q_i + tau_i S / r
//   slot d+1:  tau_1 q_1 - |tau_1| q_{d+1} + T / r^3
//   slot d+i:  r tau_i q_i + (2r(lambda_i - lambda_1) + 1/r - |tau_1|) q_{d+i} + S / r
// with T = sum_{k>=2} q_{d+k} and S = r^2 q_{d+1} + T.
void apply_Q_rhs(const NaturalParams& np, double r, std::span<const double> q, std::span<double> out) {
  require_radius(r);
  require_sizes(np, q.size(), out.size());
  const std::size_t d = np.dim();
  const double lam1 = np.lambda[0];
  const double tau1 = np.tau[0];
  const double abs_tau1 = std::abs(tau1);
  double tail = 0.0;
  for (std::size_t k = 1; k < d; ++k) tail += q[d + k];
  const double s_over_r = r * q[d] + tail / r;

  out[0] = -abs_tau1 * q[0] + tau1 * (q[d] + tail / (r * r));
  out[d] = tau1 * q[0] - abs_tau1 * q[d] + tail / (r * r * r);
  for (std::size_t i = 1; i < d; ++i) {
    const double diag = 2.0 * r * (np.lambda[i] - lam1) + 1.0 / r - abs_tau1;
    out[i] = diag * q[i] + np.tau[i] * s_over_r;
    out[d + i] = r * np.tau[i] * q[i] + diag * q[d + i] + s_over_r;
  }
}

std::vector<double> apply_Q_rhs(const NaturalParams& np, double r, std::span<const double> q) {
  std::vector<double> out(q.size());
  apply_Q_rhs(np, r, q, out);
  return out;
}

double gauge_exponent(const NaturalParams& np, double r) {
  return r * r * np.lambda[0] + r * std::abs(np.tau[0]);
}

RescaledState gauge_F_to_Q(const NaturalParams& np, double r, const HgmState& s) {
  require_radius(r);
  const std::size_t d = np.dim();
  const double g = gauge_exponent(np, r);
  RescaledState q;
  q.vec = s.vec;
  q.vec[0] /= r;
  q.vec[d] /= r * r;
  q.log_scale = s.log_scale - g;
  // exp(L_F) c_F = exp(L_Q) c_Q
  q.integral_mantissa = s.integral_mantissa * std::exp(g);
  return q;
}

HgmState gauge_Q_to_F(const NaturalParams& np, double r, const RescaledState& q) {
  require_radius(r);
  const std::size_t d = np.dim();
  const double g = gauge_exponent(np, r);
  HgmState s;
  s.vec = q.vec;
  s.vec[0] *= r;
  s.vec[d] *= r * r;
  s.log_scale = q.log_scale + g;
  s.integral_mantissa = q.integral_mantissa * std::exp(-g);
  return s;
}

double f_mantissa_F(std::size_t d, double r, std::span<const double> vec) {
  double acc = 0.0;
  for (std::size_t k = 0; k < d; ++k) acc += vec[d + k];
  return acc / (r * r);
}

double f_mantissa_Q(std::size_t d, double r, std::span<const double> vec) {
  double tail = 0.0;
  for (std::size_t k = 1; k < d; ++k) tail += vec[d + k];
  return vec[d] + tail / (r * r);
}

SplitValue recover_f(const NaturalParams& np, double r, const HgmState& s) {
  require_radius(r);
  return {f_mantissa_F(np.dim(), r, s.vec), s.log_scale};
}

SplitValue recover_f(const NaturalParams& np, double r, const RescaledState& q) {
  require_radius(r);
  return {f_mantissa_Q(np.dim(), r, q.vec), q.log_scale + gauge_exponent(np, r)};
}

}  // namespace hgm
