#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hgm/rk8pd.hpp"

using namespace hgm;

namespace {

// y' = cos(t) y, y(0) = 1, exact y = exp(sin t).
void cos_rhs(double t, std::span<const double> y, std::span<double> out) { out[0] = std::cos(t) * y[0]; }

struct OneStep {
  double err_true;
  double err_est;
};

OneStep one_step(double h) {
  Rk8pdStepper st(1);
  std::vector<double> y{1.0}, k1{1.0}, yn{0.0};
  const double est = st.attempt(cos_rhs, 0.0, y, k1, h, yn, [](auto, auto, auto sc) { sc[0] = 1.0; });
  return {std::abs(yn[0] - std::exp(std::sin(h))), est};
}

}  // namespace

TEST_CASE("tableau consistency") {
  using namespace rk8pd;
  const double b[] = {b1, b6, b7, b8, b9, b10, b11, b12, b13};
  const double bh[] = {bh1, bh6, bh7, bh8, bh9, bh10, bh11, bh12};
  CHECK(std::accumulate(std::begin(b), std::end(b), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::accumulate(std::begin(bh), std::end(bh), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  // Row sums equal the nodes.
  CHECK(a2_1 == doctest::Approx(c2));
  CHECK(a5_1 + a5_3 + a5_4 == doctest::Approx(c5));
  CHECK(a9_1 + a9_4 + a9_5 + a9_6 + a9_7 + a9_8 == doctest::Approx(c9).epsilon(1e-13));
  CHECK(a12_1 + a12_4 + a12_5 + a12_6 + a12_7 + a12_8 + a12_9 + a12_10 + a12_11 ==
        doctest::Approx(c12).epsilon(1e-13));
  CHECK(a13_1 + a13_4 + a13_5 + a13_6 + a13_7 + a13_8 + a13_9 + a13_10 + a13_11 ==
        doctest::Approx(c13).epsilon(1e-13));
}

TEST_CASE("exact on polynomials of degree 8") {
  Rk8pdStepper st(1);
  auto f = [](double t, std::span<const double>, std::span<double> out) { out[0] = 9 * std::pow(t, 8); };
  std::vector<double> y{0.0}, k1{0.0}, yn{0.0};
  st.attempt(f, 0.0, y, k1, 1.0, yn, [](auto, auto, auto sc) { sc[0] = 1.0; });
  CHECK(yn[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("local error is ninth order and the estimate is not optimistic") {
  const OneStep a = one_step(0.2), b = one_step(0.1);
  const double slope = std::log2(a.err_true / b.err_true);
  CHECK(slope > 8.3);
  CHECK(slope < 9.7);
  CHECK(a.err_est >= a.err_true);
  CHECK(b.err_est >= b.err_true);
}

TEST_CASE("zero weights leave a component uncontrolled") {
  Rk8pdStepper st(2);
  auto f = [](double, std::span<const double> y, std::span<double> out) {
    out[0] = -50 * y[0];
    out[1] = 0.0;
  };
  std::vector<double> y{1.0, 1.0}, k1{-50.0, 0.0}, yn(2);
  const double err = st.attempt(f, 0.0, y, k1, 0.5, yn, [](auto, auto, auto sc) {
    sc[0] = 0.0;
    sc[1] = 1.0;
  });
  CHECK(err == 0.0);
}

TEST_CASE("step controller") {
  const StepController c;
  CHECK(c.next(1.0, 4.0, false) == doctest::Approx(0.9 * std::pow(4.0, -1.0 / 8)));
  CHECK(c.next(1.0, 1e12, false) == doctest::Approx(0.2));
  CHECK(c.next(1.0, 0.7, false) == 1.0);
  CHECK(c.next(1.0, 1e-3, true) == 1.0);
  CHECK(c.next(1.0, 1e-3, false) == doctest::Approx(0.9 * std::pow(1e-3, -1.0 / 9)));
  CHECK(c.next(1.0, 0.0, false) == 5.0);
  CHECK(c.next(1.0, 0.45, false) == 1.0);
  CHECK(c.next(1.0, NAN, false) == doctest::Approx(0.2));
}

TEST_CASE("adaptive integration meets its tolerance") {
  for (double tol : {1e-6, 1e-10}) {
    Rk8pdStepper st(1);
    const StepController ctl;
    std::vector<double> y{1.0}, k1(1), yn(1);
    double t = 0.0, h = 0.1;
    const double T = 20.0;
    bool rejected = false;
    cos_rhs(t, y, k1);
    while (t < T) {
      const double hh = std::min(h, T - t);
      const double err = st.attempt(cos_rhs, t, y, k1, hh, yn, [&](auto a, auto b, auto sc) {
        sc[0] = tol * std::max(std::abs(a[0]), std::abs(b[0]));
      });
      if (err <= 1.0) {
        t += hh;
        y = yn;
        cos_rhs(t, y, k1);
      }
      h = ctl.next(hh, err, rejected);
      rejected = err > 1.0;
    }
    CHECK(std::abs(y[0] / std::exp(std::sin(T)) - 1) < 10 * tol);
  }
}
