#include "hgm/series.hpp"

#include <cmath>
#include <string>

#include "hgm/errors.hpp"

namespace hgm {

namespace {

using Poly = std::vector<double>;

// Truncated product of two polynomials in z, keeping degrees <= n.
Poly multiply(const Poly& a, const Poly& b, int n) {
  Poly out(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; i + j <= n; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// log k! for k = 0..n and log (2k-1)!! for k = 0..n, with (-1)!! = 1.
struct LogTables {
  std::vector<double> fact;
  std::vector<double> odd_dfact;

  explicit LogTables(int n) : fact(2 * n + 1, 0.0), odd_dfact(n + 1, 0.0) {
    for (int k = 1; k <= 2 * n; ++k) fact[k] = fact[k - 1] + std::log(static_cast<double>(k));
    for (int k = 1; k <= n; ++k) odd_dfact[k] = odd_dfact[k - 1] + std::log(2.0 * k - 1.0);
  }
};

// Per-coordinate generating polynomials: the coefficient of z^k collects the
// monomials lambda^a tau^{2b} with a + b = k, weighted by (2k-1)!!/(a!(2b)!).
struct CoordinatePolys {
  Poly h, dh_dlambda, dh_dtau;
};

CoordinatePolys coordinate_polys(double lam, double tau, int n, const LogTables& lt) {
  CoordinatePolys p{Poly(n + 1, 0.0), Poly(n + 1, 0.0), Poly(n + 1, 0.0)};
  for (int k = 0; k <= n; ++k) {
    for (int a = 0; a <= k; ++a) {
      const int b = k - a;
      const double w = std::exp(lt.odd_dfact[k] - lt.fact[a] - lt.fact[2 * b]);
      const double lam_a = std::pow(lam, a);
      const double tau_2b = std::pow(tau, 2 * b);
      p.h[k] += w * lam_a * tau_2b;
      if (a > 0) p.dh_dlambda[k] += w * a * std::pow(lam, a - 1) * tau_2b;
      if (b > 0) p.dh_dtau[k] += w * lam_a * 2.0 * b * std::pow(tau, 2 * b - 1);
    }
  }
  return p;
}

}  // namespace

std::vector<double> leading_initial_state(const NaturalParams& np, double r0) {
  if (!(r0 > 0.0)) throw Error(ErrorCode::SingularRadius, "initial radius must be positive", r0);
  const std::size_t d = np.dim();
  const double s_over_d = surface_area(static_cast<int>(d)) / static_cast<double>(d);
  std::vector<double> v(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    v[i] = s_over_d * np.tau[i];
    v[d + i] = s_over_d;
  }
  return v;
}

SeriesValue series_f_and_gradient(const NaturalParams& np, double r, const SeriesOptions& opts) {
  if (!(r > 0.0)) throw Error(ErrorCode::SingularRadius, "series radius must be positive", r);
  if (opts.max_total_degree < 0 || !(opts.rel_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid series options");
  }
  const int n = opts.max_total_degree;
  const std::size_t d = np.dim();
  const LogTables lt(n);

  std::vector<CoordinatePolys> polys;
  polys.reserve(d);
  for (std::size_t i = 0; i < d; ++i) polys.push_back(coordinate_polys(np.lambda[i], np.tau[i], n, lt));

  // prefix[i] = prod_{j<i} h_j, suffix[i] = prod_{j>=i} h_j
  Poly one(n + 1, 0.0);
  one[0] = 1.0;
  std::vector<Poly> prefix(d + 1, one), suffix(d + 1, one);
  for (std::size_t i = 0; i < d; ++i) prefix[i + 1] = multiply(prefix[i], polys[i].h, n);
  for (std::size_t i = d; i-- > 0;) suffix[i] = multiply(suffix[i + 1], polys[i].h, n);

  std::vector<Poly> comp(2 * d + 1);
  for (std::size_t i = 0; i < d; ++i) {
    const Poly others = multiply(prefix[i], suffix[i + 1], n);
    comp[i] = multiply(others, polys[i].dh_dtau, n);
    comp[d + i] = multiply(others, polys[i].dh_dlambda, n);
  }
  comp[2 * d] = prefix[d];

  // Shell weight r^{d-1} S r^{2k} (d-2)!!/(d-2+2k)!!.
  const double dd = static_cast<double>(d);
  double weight = std::pow(r, dd - 1.0) * surface_area(static_cast<int>(d));
  std::vector<double> sum(2 * d + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    if (k > 0) weight *= r * r / (dd - 2.0 + 2.0 * k);
    bool converged = k > 0;
    for (std::size_t c = 0; c <= 2 * d; ++c) {
      const double term = weight * comp[c][k];
      sum[c] += term;
      if (std::abs(term) > opts.rel_tol * std::abs(sum[c])) converged = false;
    }
    if (converged) {
      SeriesValue out;
      out.f = sum[2 * d];
      out.grad.assign(sum.begin(), sum.end() - 1);
      return out;
    }
  }
  throw Error(ErrorCode::NoConvergence,
              "series did not converge within total degree " + std::to_string(n), r);
}

}  // namespace hgm
