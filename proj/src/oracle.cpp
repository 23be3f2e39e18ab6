#include "hgm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>

#include "hgm/errors.hpp"

namespace hgm {

namespace {

constexpr std::uint64_t kShards = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

 private:
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t run_shard(const ModelParams& p, double R2, std::uint64_t n, std::uint64_t seed, bool antithetic) {
  const std::size_t d = p.dim();
  std::vector<double> sd(d);
  for (std::size_t i = 0; i < d; ++i) sd[i] = std::sqrt(p.sigma2[i]);
  NormalSource z(seed);
  std::vector<double> zs(d);
  std::uint64_t hits = 0;
  std::uint64_t done = 0;
  while (done < n) {
    for (std::size_t i = 0; i < d; ++i) zs[i] = z();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = p.mu[i] + sd[i] * zs[i];
      s += x * x;
    }
    hits += s <= R2;
    if (++done == n || !antithetic) continue;
    s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = p.mu[i] - sd[i] * zs[i];
      s += x * x;
    }
    hits += s <= R2;
    ++done;
  }
  return hits;
}

double integrand_exponent(const NaturalParams& np, const double* x) {
  double e = 0.0;
  for (std::size_t i = 0; i < np.dim(); ++i) e += np.lambda[i] * x[i] * x[i] + np.tau[i] * x[i];
  return e;
}

constexpr double kInnerTol = 1e-13;
constexpr double kOuterTol = 1e-11;

// Integral over the sphere of radius r of w(x) exp(sum lambda x^2 + tau x).
// The exponent is shifted by its value at a fixed reference so that results
// far below the double range still come out relative to `shift`. Integrals
// that cancel by symmetry are judged against `scale` rather than their own
// L1 norm.
double sphere_integral(const NaturalParams& np, double r, const std::function<double(const double*)>& w,
                       double shift, double scale = 0.0) {
  const std::size_t d = np.dim();
  if (d == 0 || d > 3) throw Error(ErrorCode::InvalidArgument, "sphere quadrature needs 1 <= d <= 3");
  if (!(r > 0.0)) throw Error(ErrorCode::SingularRadius, "radius must be positive", r);
  auto point = [&](const double* x) { return w(x) * std::exp(integrand_exponent(np, x) - shift); };

  if (d == 1) {
    const double a[1] = {r};
    const double b[1] = {-r};
    return point(a) + point(b);
  }
  auto trap = [&](auto&& g) {
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::trapezoidal(g, 0.0, 2.0 * std::numbers::pi, kInnerTol, 20, &err, &l1);
    // Rings whose shifted values are denormal-small carry no weight.
    if (!(err <= 1e-10 * std::max({l1, 1e-12 * scale, 1e-200})) && l1 > 0.0) {
      throw Error(ErrorCode::NoConvergence, "circle quadrature did not converge", r);
    }
    return v;
  };
  if (d == 2) {
    return r * trap([&](double t) {
      const double x[2] = {r * std::cos(t), r * std::sin(t)};
      return point(x);
    });
  }
  auto ring = [&](double u) {
    const double s = r * std::sqrt(std::max(0.0, 1.0 - u * u));
    return trap([&](double t) {
      const double x[3] = {s * std::cos(t), s * std::sin(t), r * u};
      return point(x);
    });
  };
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(ring, -1.0, 1.0, 15, kOuterTol, &err,
                                                                                   &l1);
  if (!(err <= 1e-9 * std::max(l1, scale)) && l1 > 0.0) {
    throw Error(ErrorCode::NoConvergence, "sphere quadrature did not converge", r);
  }
  return r * r * v;
}

// Upper bound of the exponent on the sphere, used as the shift.
double exponent_bound(const NaturalParams& np, double r) {
  double lmax = -std::numeric_limits<double>::infinity();
  double t2 = 0.0;
  for (std::size_t i = 0; i < np.dim(); ++i) {
    lmax = std::max(lmax, np.lambda[i]);
    t2 += np.tau[i] * np.tau[i];
  }
  return r * r * lmax + r * std::sqrt(t2);
}

}  // namespace

McEstimate mc_ball_probability(const ModelParams& params, double R, const McOptions& opts) {
  params.validate();
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive", R);
  if (opts.n_samples == 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be positive");

  std::vector<std::uint64_t> hits(kShards, 0);
  auto shard_size = [&](std::uint64_t k) {
    return opts.n_samples / kShards + (k < opts.n_samples % kShards ? 1 : 0);
  };
  auto work = [&](std::uint64_t k) {
    hits[k] = run_shard(params, R * R, shard_size(k), splitmix64(opts.seed + k), opts.antithetic);
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, kShards));
  if (threads <= 1) {
    for (std::uint64_t k = 0; k < kShards; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::uint64_t k = t; k < kShards; k += threads) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  const double n = static_cast<double>(opts.n_samples);
  McEstimate out;
  out.estimate = static_cast<double>(total) / n;
  out.standard_error = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  return out;
}

double quad_fisher_bingham(const NaturalParams& np, double r) {
  const double shift = exponent_bound(np, r);
  const double v = sphere_integral(np, r, [](const double*) { return 1.0; }, shift);
  return v * std::exp(shift);
}

std::vector<double> quad_fisher_bingham_gradient(const NaturalParams& np, double r) {
  const std::size_t d = np.dim();
  const double shift = exponent_bound(np, r);
  const double mass = sphere_integral(np, r, [](const double*) { return 1.0; }, shift);
  std::vector<double> g(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    g[i] = sphere_integral(np, r, [i](const double* x) { return x[i]; }, shift, r * mass) * std::exp(shift);
    g[d + i] =
        sphere_integral(np, r, [i](const double* x) { return x[i] * x[i]; }, shift, r * r * mass) * std::exp(shift);
  }
  return g;
}

double chi_closed_form(int d, double r) {
  if (d < 1 || !(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "chi closed form needs d >= 1, r > 0");
  return std::exp(log_surface_area(d) + (d - 1) * std::log(r) - 0.5 * r * r);
}

double exp_product_closed_form(int n, double r) {
  if (n < 1 || !(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "exp-product closed form needs n >= 1, r > 0");
  return std::exp(n * std::log(-std::expm1(-r * r)));
}

}  // namespace hgm
