#include "hgm/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "hgm/families.hpp"
#include "hgm/integrator.hpp"
#include "hgm/model.hpp"
#include "hgm/oracle.hpp"
#include "hgm/pfaffian.hpp"
#include "hgm/series.hpp"

namespace hgm {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

NaturalParams random_natural(Rng& rng, std::size_t d) {
  ModelParams p;
  for (std::size_t i = 0; i < d; ++i) {
    p.sigma2.push_back(std::exp(uniform(rng, std::log(0.4), std::log(6.0))));
    p.mu.push_back(uniform(rng, -1.0, 1.0));
  }
  return to_natural(p);
}

double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SuiteResult make(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

}  // namespace

SuiteResult suite_pfaffian_column_probe() {
  Rng rng(11);
  std::size_t mismatches = 0;
  std::size_t probes = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + trial % 6;
    std::vector<double> lambda(d), tau(d);
    for (std::size_t i = 0; i < d; ++i) {
      lambda[i] = uniform(rng, -3.0, 0.5);
      tau[i] = uniform(rng, -2.0, 2.0);
    }
    const NaturalParams np = natural_from(lambda, tau);
    const double r = uniform(rng, 0.05, 6.0);
    const auto dense = dense_pfaffian(np, r);
    const std::size_t n = 2 * d;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      const auto col = apply_P(np, r, e);
      ++probes;
      for (std::size_t i = 0; i < n; ++i) {
        if (col[i] != dense[i * n + j]) {
          ++mismatches;
          break;
        }
      }
    }
  }
  return make("pfaffian_column_probe", mismatches == 0,
              std::to_string(probes - mismatches) + "/" + std::to_string(probes) + " columns exact");
}

SuiteResult suite_gauge_round_trip() {
  Rng rng(12);
  bool ok = true;
  double worst_c = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + trial % 5;
    const NaturalParams np = random_natural(rng, d);
    HgmState s;
    for (std::size_t i = 0; i < 2 * d; ++i) s.vec.push_back(uniform(rng, -2.0, 2.0));
    s.log_scale = 0.0;
    s.integral_mantissa = uniform(rng, 0.1, 3.0);
    const HgmState back = gauge_Q_to_F(np, 1.0, gauge_F_to_Q(np, 1.0, s));
    ok = ok && back.vec == s.vec && back.log_scale == s.log_scale;
    worst_c = std::max(worst_c, rel_err(back.integral_mantissa, s.integral_mantissa));
  }
  ok = ok && worst_c <= 4e-16;
  return make("gauge_round_trip", ok, "vec and ledger exact, integral rel err " + fmt("%.2e", worst_c));
}

SuiteResult suite_series_pfaffian_fd() {
  Rng rng(13);
  double worst = 0.0;
  const double h = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + trial % 4;
    const NaturalParams np = random_natural(rng, d);
    const double r = uniform(rng, 0.1, 0.5);
    const auto F = series_f_and_gradient(np, r).grad;
    const auto Fp = series_f_and_gradient(np, r + h).grad;
    const auto Fm = series_f_and_gradient(np, r - h).grad;
    const auto PF = apply_P(np, r, F);
    double norm = 0.0;
    for (double v : F) norm = std::max(norm, std::abs(v));
    for (std::size_t i = 0; i < F.size(); ++i) {
      const double fd = (Fp[i] - Fm[i]) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(PF[i]), 1e-8 * norm});
      worst = std::max(worst, std::abs(fd - PF[i]) / scale);
    }
  }
  return make("series_pfaffian_fd", worst <= 1e-5, "max rel err " + fmt("%.2e", worst));
}

SuiteResult suite_recover_f_identity() {
  Rng rng(14);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + trial % 6;
    const NaturalParams np = random_natural(rng, d);
    const double r = uniform(rng, 0.05, 0.5);
    const SeriesValue sv = series_f_and_gradient(np, r);
    HgmState s{sv.grad, 0.0, 0.0};
    worst = std::max(worst, rel_err(recover_f(np, r, s).value(), sv.f));
  }
  return make("recover_f_identity", worst <= 1e-7, "max rel err " + fmt("%.2e", worst));
}

SuiteResult suite_phase_switch_continuity() {
  const NaturalParams np = to_natural(ModelParams{{9.0, 4.0, 1.0}, {1.0, 0.5, 0.25}});
  SolveOptions a;
  SolveOptions b;
  b.switch_radius = 2.0;
  HgmPropagator pa(np, a);
  HgmPropagator pb(np, b);
  pa.advance_to(1.0);
  pb.advance_to(1.0);
  const HgmState fa = pa.f_state();
  const HgmState fb = pb.f_state();
  double worst = rel_err(pa.log_probability(), pb.log_probability());
  for (std::size_t i = 0; i < fa.vec.size(); ++i) {
    worst = std::max(worst, rel_err(fa.vec[i] * std::exp(fa.log_scale), fb.vec[i] * std::exp(fb.log_scale)));
  }
  const bool ok = pa.in_gauge_phase() && !pb.in_gauge_phase() && worst <= 1e-12;
  return make("phase_switch_continuity", ok, "max rel jump " + fmt("%.2e", worst));
}

SuiteResult suite_scale_equivariance() {
  Rng rng(15);
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t d = 2 + trial % 4;
    ModelParams p;
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      p.sigma2.push_back(std::exp(uniform(rng, std::log(0.4), std::log(4.0))));
      p.mu.push_back(uniform(rng, -1.0, 1.0));
      total += p.sigma2.back() + p.mu.back() * p.mu.back();
    }
    const double R = std::sqrt(total);
    const double c = trial % 2 ? 2.5 : 0.4;
    ModelParams q = p;
    for (auto& v : q.sigma2) v *= c * c;
    for (auto& v : q.mu) v *= c;
    worst = std::max(worst, rel_err(solve_ball_probability(p, R).p, solve_ball_probability(q, c * R).p));
  }
  return make("scale_equivariance", worst <= 1e-5, "max rel err " + fmt("%.2e", worst));
}

SuiteResult suite_tolerance_self_convergence(bool full) {
  const double tol = 1e-6;
  double worst = 0.0;
  const int dmax = full ? 12 : 10;
  for (Family f : {Family::Hirotsu1, Family::Hirotsu2}) {
    for (MeanPattern m : {MeanPattern::Zero, MeanPattern::Ramp}) {
      for (int d = 10; d <= dmax; ++d) {
        SolveOptions coarse;
        coarse.rel_tol = coarse.abs_tol = tol;
        SolveOptions fine = coarse;
        fine.rel_tol = tol / 2;
        const ModelParams p = make_family(f, d, m);
        worst = std::max(worst, std::abs(solve_ball_probability(p, 40.0, coarse).p -
                                         solve_ball_probability(p, 40.0, fine).p));
      }
    }
  }
  return make("tolerance_self_convergence", worst < 10 * tol, "max |dp| " + fmt("%.2e", worst));
}

SuiteResult suite_ledger_independence() {
  const ModelParams p = make_family(Family::Hirotsu1, 20, MeanPattern::Ramp);
  std::vector<BallProbResult> res;
  std::size_t rescales_low = 0;
  for (double high : {1e50, 1e100, 1e200}) {
    SolveOptions o;
    o.rescale_high = high;
    res.push_back(solve_ball_probability(p, 40.0, o));
    if (high == 1e50) rescales_low = res.back().stats.rescales;
  }
  double worst = 0.0;
  for (const auto& r : res) {
    worst = std::max({worst, rel_err(r.p, res[0].p), rel_err(r.one_minus_p, res[0].one_minus_p)});
  }
  return make("ledger_independence", worst <= 1e-12 && rescales_low > 0,
              "max rel diff " + fmt("%.2e", worst) + ", rescales at 1e50: " + std::to_string(rescales_low));
}

SuiteResult suite_cross_oracle() {
  Rng rng(16);
  double worst = 0.0;
  SolveOptions o;
  o.rel_tol = o.abs_tol = 1e-10;
  for (int trial = 0; trial < 9; ++trial) {
    const std::size_t d = 1 + trial % 3;
    const NaturalParams np = random_natural(rng, d);
    const double r = uniform(rng, 0.2, 1.0);
    const double fs = series_f_and_gradient(np, r).f;
    const double fq = quad_fisher_bingham(np, r);
    const double radii[1] = {r};
    const double fh = solve_f_trace(np, radii, o).front().f.value();
    worst = std::max({worst, rel_err(fs, fq), rel_err(fs, fh), rel_err(fq, fh)});
  }
  return make("cross_oracle", worst <= 1e-7, "series/quadrature/hgm max rel err " + fmt("%.2e", worst));
}

SuiteResult suite_closed_forms() {
  SolveOptions o;
  o.rel_tol = o.abs_tol = 1e-10;
  double chi = 0.0;
  for (int d = 3; d <= 10; ++d) {
    const double radii[1] = {1.0};
    const double f = solve_f_trace(make_family(Family::Chi, d), radii, o).front().f.value();
    chi = std::max(chi, std::abs(chi_closed_form(d, 1.0) - f));
  }
  double ep = 0.0;
  for (int d = 6; d <= 20; d += 2) {
    const double p = solve_ball_probability(make_family(Family::ExpProduct, d), 1.0, o).p;
    ep = std::max(ep, std::abs(exp_product_closed_form(d / 2, 1.0) - p));
  }
  return make("closed_forms", chi <= 2e-6 && ep <= 1e-7,
              "chi max abs err " + fmt("%.2e", chi) + ", exp-product max abs err " + fmt("%.2e", ep));
}

SuiteResult suite_mc_coverage(int n_configs, unsigned long long n_samples, unsigned long long mc_seed) {
  Rng rng(17);
  int inside = 0;
  int done = 0;
  double worst_z = 0.0;
  while (done < n_configs) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng() % 6);
    ModelParams p;
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      p.sigma2.push_back(std::exp(uniform(rng, std::log(0.2), std::log(4.0))));
      p.mu.push_back(uniform(rng, -1.0, 1.0));
      total += p.sigma2.back() + p.mu.back() * p.mu.back();
    }
    const double R = std::sqrt(total) * uniform(rng, 0.5, 1.3);
    const double hgm = solve_ball_probability(p, R).p;
    if (hgm < 0.05 || hgm > 0.95) continue;
    McOptions mo;
    mo.n_samples = n_samples;
    mo.seed = mc_seed + static_cast<unsigned long long>(done);
    const McEstimate mc = mc_ball_probability(p, R, mo);
    const double z = std::abs(hgm - mc.estimate) / mc.standard_error;
    worst_z = std::max(worst_z, z);
    inside += z <= 4.0;
    ++done;
  }
  return make("mc_coverage", inside >= n_configs - 2,
              std::to_string(inside) + "/" + std::to_string(n_configs) + " within 4 SE, max z " +
                  fmt("%.2f", worst_z));
}

std::vector<SuiteResult> run_selftest(SelftestLevel level, unsigned long long mc_seed) {
  const bool full = level == SelftestLevel::Full;
  std::vector<SuiteResult> out;
  auto guarded = [&out](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back(make(name, false, std::string("exception: ") + e.what()));
    }
  };
  guarded("pfaffian_column_probe", suite_pfaffian_column_probe);
  guarded("gauge_round_trip", suite_gauge_round_trip);
  guarded("series_pfaffian_fd", suite_series_pfaffian_fd);
  guarded("recover_f_identity", suite_recover_f_identity);
  guarded("phase_switch_continuity", suite_phase_switch_continuity);
  guarded("scale_equivariance", suite_scale_equivariance);
  guarded("tolerance_self_convergence", [full] { return suite_tolerance_self_convergence(full); });
  guarded("ledger_independence", suite_ledger_independence);
  guarded("cross_oracle", suite_cross_oracle);
  guarded("closed_forms", suite_closed_forms);
  if (full) guarded("mc_coverage", [mc_seed] { return suite_mc_coverage(50, 10'000'000, mc_seed); });
  return out;
}

void print_results(const std::vector<SuiteResult>& results, std::ostream& out) {
  for (const auto& r : results) out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
}

}  // namespace hgm
