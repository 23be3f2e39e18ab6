#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hgm/errors.hpp"
#include "hgm/integrator.hpp"
#include "hgm/laplace.hpp"
#include "hgm/oracle.hpp"

using namespace hgm;

namespace {

const ModelParams kFirst{{9.0, 4.0, 1.0}, {1.0, 0.5, 0.25}};

SolveOptions tight(double tol = 1e-10) {
  SolveOptions o;
  o.rel_tol = o.abs_tol = tol;
  return o;
}

ErrorCode code_of(auto&& fn, double* radius = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (radius) *radius = e.radius();
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("exp-product closed form at d = 6, R = 1") {
  const double h = 1 / std::sqrt(2.0), q = 0.5, s = 1 / std::sqrt(6.0);
  const ModelParams mp{{h * h, h * h, q * q, q * q, s * s, s * s}, std::vector<double>(6, 0.0)};
  const auto res = solve_ball_probability(mp, 1.0);
  CHECK(res.p == doctest::Approx(0.252580).epsilon(1e-5));
  CHECK(res.p == doctest::Approx(std::pow(1 - std::exp(-1.0), 3)).epsilon(1e-5));
  CHECK(res.one_minus_p == doctest::Approx(1 - res.p).epsilon(1e-12));
}

TEST_CASE("R = r0 leaves only the seed mass") {
  const auto res = solve_ball_probability(kFirst, 1e-6);
  CHECK(res.p >= 0.0);
  CHECK(res.p < 1e-17);
  CHECK(res.one_minus_p == 1.0);
  CHECK(res.stats.steps == 0);
}

TEST_CASE("first experiment") {
  SolveOptions o;
  for (double r = 0.5; r <= 40.0; r += 0.5) o.checkpoint_radii.push_back(r);
  const auto res = solve_ball_probability(kFirst, 40.0, o);
  REQUIRE(res.checkpoints.size() == o.checkpoint_radii.size());
  for (std::size_t i = 1; i < res.checkpoints.size(); ++i)
    CHECK(res.checkpoints[i].G >= res.checkpoints[i - 1].G - 10 * o.rel_tol);
  CHECK(res.p <= 1.0);
  // The default tolerance leaves about 1.5e-6 of global error in p.
  CHECK(res.p >= 1 - 2e-6);
  const auto fine = solve_ball_probability(kFirst, 40.0, tight(1e-8));
  CHECK(fine.p >= 1 - 1e-6);
  CHECK(fine.p <= 1.0);
  CHECK(res.one_minus_p > 0.0);
  CHECK(res.one_minus_p < 1e-30);

  SUBCASE("Monte Carlo brackets G(2), G(4), G(6)") {
    for (double R : {2.0, 4.0, 6.0}) {
      const McEstimate mc = mc_ball_probability(kFirst, R, McOptions{});
      const double G = res.checkpoints[static_cast<std::size_t>(2 * R) - 1].G;
      CAPTURE(R);
      CHECK(std::abs(G - mc.estimate) <= 4 * mc.standard_error);
    }
  }
}

TEST_CASE("f trace") {
  SUBCASE("identity covariance at r = 1 against the sphere area") {
    const double radii[1] = {1.0};
    for (int d = 3; d <= 10; ++d) {
      const auto tr = solve_f_trace(ModelParams{std::vector<double>(d, 1.0), std::vector<double>(d, 0.0)}, radii,
                                    tight());
      const double exact = 2 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0) * std::exp(-0.5);
      CAPTURE(d);
      CHECK(std::abs(tr[0].f.value() - exact) <= 2e-6);
    }
  }
  SUBCASE("flipping every mean sign leaves the trace unchanged") {
    const double radii[] = {0.5, 1.0, 3.0, 10.0, 25.0};
    ModelParams flipped = kFirst;
    for (auto& m : flipped.mu) m = -m;
    const auto a = solve_f_trace(kFirst, radii);
    const auto b = solve_f_trace(flipped, radii);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i].f.log_abs() - b[i].f.log_abs()) <= 1e-12);
      CHECK(a[i].G == doctest::Approx(b[i].G).epsilon(1e-12));
    }
  }
  SUBCASE("r = 10 ratios to the asymptotic forms lie in [0.9, 1.1]") {
    const double radii[1] = {10.0};
    const NaturalParams np = to_natural(kFirst);
    const auto tr = solve_f_trace(np, radii, tight());
    const LaplaceEval le = asymptotic_eval(np, 10.0);
    const std::size_t d = np.dim();
    const double lf = tr[0].f.log_abs();
    CHECK(std::exp(lf - le.log_f) == doctest::Approx(1.0).epsilon(0.1));
    for (std::size_t i = 0; i < d; ++i) {
      const double L = tr[0].F.log_scale - le.log_f;
      const double rt = tr[0].F.vec[i] * std::exp(L) / le.dtau_ratio[i];
      const double rl = tr[0].F.vec[d + i] * std::exp(L) / le.dlambda_ratio[i];
      CHECK(rt >= 0.9);
      CHECK(rt <= 1.1);
      CHECK(rl >= 0.9);
      CHECK(rl <= 1.1);
    }
  }
}

TEST_CASE("rescale") {
  const HgmState s{{3.0, -8.0, 0.5, 2.0}, 1.25, 0.75};
  SUBCASE("shift by log max brings the mantissa to 1") {
    const HgmState t = rescale(s, std::log(8.0));
    double m = 0.0;
    for (double x : t.vec) m = std::max(m, std::abs(x));
    CHECK(m == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.log_scale == doctest::Approx(1.25 + std::log(8.0)));
  }
  SUBCASE("composition adds in the ledger") {
    const HgmState a = rescale(rescale(s, 2.0), -0.5);
    const HgmState b = rescale(s, 1.5);
    CHECK(a.log_scale == doctest::Approx(b.log_scale).epsilon(1e-15));
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.vec[i] == doctest::Approx(b.vec[i]).epsilon(1e-15));
  }
  SUBCASE("recover_f is invariant") {
    const NaturalParams np = natural_from({-0.5, -1.0}, {0.1, 0.2});
    const SplitValue f0 = recover_f(np, 2.0, s);
    const SplitValue f1 = recover_f(np, 2.0, rescale(s, 37.0));
    CHECK(f1.value() == doctest::Approx(f0.value()).epsilon(1e-15));
    const RescaledState q = gauge_F_to_Q(np, 2.0, s);
    CHECK(recover_f(np, 2.0, rescale(q, -12.0)).value() == doctest::Approx(recover_f(np, 2.0, q).value()).epsilon(1e-15));
  }
}

TEST_CASE("ledger independence of rescale_high") {
  const ModelParams big{std::vector<double>(30, 2.0), std::vector<double>(30, 0.1)};
  std::vector<double> ps;
  std::size_t rescales = 0;
  for (double hi : {1e50, 1e100, 1e200}) {
    SolveOptions o;
    o.rescale_high = hi;
    const auto res = solve_ball_probability(big, 8.0, o);
    ps.push_back(res.p);
    if (hi == 1e50) rescales = res.stats.rescales;
  }
  CHECK(rescales > 0);
  CHECK(ps[1] == doctest::Approx(ps[0]).epsilon(1e-12));
  CHECK(ps[2] == doctest::Approx(ps[0]).epsilon(1e-12));
}

TEST_CASE("scale equivariance") {
  const auto a = solve_ball_probability(kFirst, 3.0);
  ModelParams scaled = kFirst;
  const double c = 1.7;
  for (auto& s : scaled.sigma2) s *= c * c;
  for (auto& m : scaled.mu) m *= c;
  const auto b = solve_ball_probability(scaled, 3.0 * c);
  CHECK(b.p == doctest::Approx(a.p).epsilon(1e-5));
}

TEST_CASE("tail accuracy in one dimension") {
  const ModelParams one{{1.0}, {0.0}};
  const auto res = solve_ball_probability(one, 3.0);
  CHECK(res.one_minus_p == doctest::Approx(std::erfc(3 / std::sqrt(2.0))).epsilon(1e-5));
  CHECK(res.p == doctest::Approx(1 - std::erfc(3 / std::sqrt(2.0))).epsilon(1e-6));
}

TEST_CASE("phase switch continuity") {
  const double radii[1] = {1.0};
  SolveOptions a, b;
  b.switch_radius = 2.0;
  const auto ta = solve_f_trace(kFirst, radii, a);
  const auto tb = solve_f_trace(kFirst, radii, b);
  CHECK(ta[0].f.value() == doctest::Approx(tb[0].f.value()).epsilon(1e-12));
  CHECK(ta[0].G == doctest::Approx(tb[0].G).epsilon(1e-12));
}

TEST_CASE("solver errors carry the radius") {
  SUBCASE("step budget") {
    SolveOptions o;
    o.max_steps = 10;
    double r = NAN;
    CHECK(code_of([&] { solve_ball_probability(kFirst, 40.0, o); }, &r) == ErrorCode::StepBudgetExceeded);
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
    CHECK(r < 40.0);
  }
  SUBCASE("tolerance far below machine precision") {
    SolveOptions o = tight(1e-30);
    double r = NAN;
    CHECK(code_of([&] { solve_ball_probability(kFirst, 5.0, o); }, &r) == ErrorCode::StepUnderflow);
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
  }
  SUBCASE("bad options") {
    SolveOptions o;
    o.rel_tol = -1.0;
    CHECK(code_of([&] { solve_ball_probability(kFirst, 5.0, o); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { solve_ball_probability(kFirst, 1e-7); }) == ErrorCode::InvalidArgument);
    SolveOptions c;
    c.checkpoint_radii = {2.0, 1.0};
    CHECK(code_of([&] { solve_ball_probability(kFirst, 5.0, c); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("propagator") {
  HgmPropagator prop(to_natural(kFirst), SolveOptions{});
  CHECK_FALSE(prop.in_gauge_phase());
  prop.advance_to(0.5);
  CHECK_FALSE(prop.in_gauge_phase());
  const double lp = prop.log_probability();
  prop.advance_to(5.0);
  CHECK(prop.in_gauge_phase());
  CHECK(prop.radius() == 5.0);
  CHECK(prop.log_probability() > lp);
  const SplitValue banked = prop.take_integral();
  CHECK(banked.value() > 0.0);
  CHECK(prop.integral().value() == 0.0);
  prop.advance_to(6.0);
  CHECK(prop.integral().value() > 0.0);
}
