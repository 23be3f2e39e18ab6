#pragma once

// Prince-Dormand RK8(7)13M embedded pair: 13 stages, 8th-order solution,
// error estimated against the embedded 7th-order solution.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hgm {

namespace rk8pd {

inline constexpr double c2 = 1.0 / 18.0;
inline constexpr double c3 = 1.0 / 12.0;
inline constexpr double c4 = 1.0 / 8.0;
inline constexpr double c5 = 5.0 / 16.0;
inline constexpr double c6 = 3.0 / 8.0;
inline constexpr double c7 = 59.0 / 400.0;
inline constexpr double c8 = 93.0 / 200.0;
inline constexpr double c9 = 5490023248.0 / 9719169821.0;
inline constexpr double c10 = 13.0 / 20.0;
inline constexpr double c11 = 1201146811.0 / 1299019798.0;
inline constexpr double c12 = 1.0;
inline constexpr double c13 = 1.0;
inline constexpr double a2_1 = 1.0 / 18.0;
inline constexpr double a3_1 = 1.0 / 48.0;
inline constexpr double a3_2 = 1.0 / 16.0;
inline constexpr double a4_1 = 1.0 / 32.0;
inline constexpr double a4_3 = 3.0 / 32.0;
inline constexpr double a5_1 = 5.0 / 16.0;
inline constexpr double a5_3 = -75.0 / 64.0;
inline constexpr double a5_4 = 75.0 / 64.0;
inline constexpr double a6_1 = 3.0 / 80.0;
inline constexpr double a6_4 = 3.0 / 16.0;
inline constexpr double a6_5 = 3.0 / 20.0;
inline constexpr double a7_1 = 29443841.0 / 614563906.0;
inline constexpr double a7_4 = 77736538.0 / 692538347.0;
inline constexpr double a7_5 = -28693883.0 / 1125000000.0;
inline constexpr double a7_6 = 23124283.0 / 1800000000.0;
inline constexpr double a8_1 = 16016141.0 / 946692911.0;
inline constexpr double a8_4 = 61564180.0 / 158732637.0;
inline constexpr double a8_5 = 22789713.0 / 633445777.0;
inline constexpr double a8_6 = 545815736.0 / 2771057229.0;
inline constexpr double a8_7 = -180193667.0 / 1043307555.0;
inline constexpr double a9_1 = 39632708.0 / 573591083.0;
inline constexpr double a9_4 = -433636366.0 / 683701615.0;
inline constexpr double a9_5 = -421739975.0 / 2616292301.0;
inline constexpr double a9_6 = 100302831.0 / 723423059.0;
inline constexpr double a9_7 = 790204164.0 / 839813087.0;
inline constexpr double a9_8 = 800635310.0 / 3783071287.0;
inline constexpr double a10_1 = 246121993.0 / 1340847787.0;
inline constexpr double a10_4 = -37695042795.0 / 15268766246.0;
inline constexpr double a10_5 = -309121744.0 / 1061227803.0;
inline constexpr double a10_6 = -12992083.0 / 490766935.0;
inline constexpr double a10_7 = 6005943493.0 / 2108947869.0;
inline constexpr double a10_8 = 393006217.0 / 1396673457.0;
inline constexpr double a10_9 = 123872331.0 / 1001029789.0;
inline constexpr double a11_1 = -1028468189.0 / 846180014.0;
inline constexpr double a11_4 = 8478235783.0 / 508512852.0;
inline constexpr double a11_5 = 1311729495.0 / 1432422823.0;
inline constexpr double a11_6 = -10304129995.0 / 1701304382.0;
inline constexpr double a11_7 = -48777925059.0 / 3047939560.0;
inline constexpr double a11_8 = 15336726248.0 / 1032824649.0;
inline constexpr double a11_9 = -45442868181.0 / 3398467696.0;
inline constexpr double a11_10 = 3065993473.0 / 597172653.0;
inline constexpr double a12_1 = 185892177.0 / 718116043.0;
inline constexpr double a12_4 = -3185094517.0 / 667107341.0;
inline constexpr double a12_5 = -477755414.0 / 1098053517.0;
inline constexpr double a12_6 = -703635378.0 / 230739211.0;
inline constexpr double a12_7 = 5731566787.0 / 1027545527.0;
inline constexpr double a12_8 = 5232866602.0 / 850066563.0;
inline constexpr double a12_9 = -4093664535.0 / 808688257.0;
inline constexpr double a12_10 = 3962137247.0 / 1805957418.0;
inline constexpr double a12_11 = 65686358.0 / 487910083.0;
inline constexpr double a13_1 = 403863854.0 / 491063109.0;
inline constexpr double a13_4 = -5068492393.0 / 434740067.0;
inline constexpr double a13_5 = -411421997.0 / 543043805.0;
inline constexpr double a13_6 = 652783627.0 / 914296604.0;
inline constexpr double a13_7 = 11173962825.0 / 925320556.0;
inline constexpr double a13_8 = -13158990841.0 / 6184727034.0;
inline constexpr double a13_9 = 3936647629.0 / 1978049680.0;
inline constexpr double a13_10 = -160528059.0 / 685178525.0;
inline constexpr double a13_11 = 248638103.0 / 1413531060.0;
inline constexpr double b1 = 14005451.0 / 335480064.0;
inline constexpr double b6 = -59238493.0 / 1068277825.0;
inline constexpr double b7 = 181606767.0 / 758867731.0;
inline constexpr double b8 = 561292985.0 / 797845732.0;
inline constexpr double b9 = -1041891430.0 / 1371343529.0;
inline constexpr double b10 = 760417239.0 / 1151165299.0;
inline constexpr double b11 = 118820643.0 / 751138087.0;
inline constexpr double b12 = -528747749.0 / 2220607170.0;
inline constexpr double b13 = 1.0 / 4.0;
inline constexpr double bh1 = 13451932.0 / 455176623.0;
inline constexpr double bh6 = -808719846.0 / 976000145.0;
inline constexpr double bh7 = 1757004468.0 / 5645159321.0;
inline constexpr double bh8 = 656045339.0 / 265891186.0;
inline constexpr double bh9 = -3867574721.0 / 1518517206.0;
inline constexpr double bh10 = 465885868.0 / 322736535.0;
inline constexpr double bh11 = 53011238.0 / 667516719.0;
inline constexpr double bh12 = 2.0 / 45.0;

}  // namespace rk8pd

/// Single-step engine with its own workspace. The caller owns step-size
/// control and supplies the error weights, so the error norm can be made
/// invariant under rescaling of the state.
class Rk8pdStepper {
 public:
  static constexpr int kOrder = 8;
  static constexpr int kStages = 13;

  explicit Rk8pdStepper(std::size_t n) : n_(n) {
    for (auto& k : k_) k.assign(n, 0.0);
    tmp_.assign(n, 0.0);
    sc_.assign(n, 0.0);
  }

  std::size_t size() const noexcept { return n_; }

  /// Attempts one step of size h from (t, y) with k1 = f(t, y) already
  /// evaluated. Writes the 8th-order solution to y_new and returns
  /// max_i |err_i| / sc_i, where `weights(y, y_new, sc)` fills sc. Components
  /// with sc_i = 0 are not controlled. Calls f 12 times.
  template <class Rhs, class Weights>
  double attempt(Rhs&& f, double t, std::span<const double> y, std::span<const double> k1, double h,
                 std::span<double> y_new, Weights&& weights) {
    using namespace rk8pd;
    auto& [k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, k13] = k_;

    auto stage = [&](double c, std::vector<double>& out, auto&& combine) {
      for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * combine(i);
      f(t + c * h, std::span<const double>(tmp_), std::span<double>(out));
    };

    stage(c2, k2, [&](std::size_t i) { return a2_1 * k1[i]; });
    stage(c3, k3, [&](std::size_t i) { return a3_1 * k1[i] + a3_2 * k2[i]; });
    stage(c4, k4, [&](std::size_t i) { return a4_1 * k1[i] + a4_3 * k3[i]; });
    stage(c5, k5, [&](std::size_t i) { return a5_1 * k1[i] + a5_3 * k3[i] + a5_4 * k4[i]; });
    stage(c6, k6, [&](std::size_t i) { return a6_1 * k1[i] + a6_4 * k4[i] + a6_5 * k5[i]; });
    stage(c7, k7, [&](std::size_t i) { return a7_1 * k1[i] + a7_4 * k4[i] + a7_5 * k5[i] + a7_6 * k6[i]; });
    stage(c8, k8, [&](std::size_t i) {
      return a8_1 * k1[i] + a8_4 * k4[i] + a8_5 * k5[i] + a8_6 * k6[i] + a8_7 * k7[i];
    });
    stage(c9, k9, [&](std::size_t i) {
      return a9_1 * k1[i] + a9_4 * k4[i] + a9_5 * k5[i] + a9_6 * k6[i] + a9_7 * k7[i] + a9_8 * k8[i];
    });
    stage(c10, k10, [&](std::size_t i) {
      return a10_1 * k1[i] + a10_4 * k4[i] + a10_5 * k5[i] + a10_6 * k6[i] + a10_7 * k7[i] + a10_8 * k8[i] +
             a10_9 * k9[i];
    });
    stage(c11, k11, [&](std::size_t i) {
      return a11_1 * k1[i] + a11_4 * k4[i] + a11_5 * k5[i] + a11_6 * k6[i] + a11_7 * k7[i] + a11_8 * k8[i] +
             a11_9 * k9[i] + a11_10 * k10[i];
    });
    stage(c12, k12, [&](std::size_t i) {
      return a12_1 * k1[i] + a12_4 * k4[i] + a12_5 * k5[i] + a12_6 * k6[i] + a12_7 * k7[i] + a12_8 * k8[i] +
             a12_9 * k9[i] + a12_10 * k10[i] + a12_11 * k11[i];
    });
    stage(c13, k13, [&](std::size_t i) {
      return a13_1 * k1[i] + a13_4 * k4[i] + a13_5 * k5[i] + a13_6 * k6[i] + a13_7 * k7[i] + a13_8 * k8[i] +
             a13_9 * k9[i] + a13_10 * k10[i] + a13_11 * k11[i];
    });

    for (std::size_t i = 0; i < n_; ++i) {
      const double hi = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] +
                        b11 * k11[i] + b12 * k12[i] + b13 * k13[i];
      const double lo = bh1 * k1[i] + bh6 * k6[i] + bh7 * k7[i] + bh8 * k8[i] + bh9 * k9[i] + bh10 * k10[i] +
                        bh11 * k11[i] + bh12 * k12[i];
      y_new[i] = y[i] + h * hi;
      tmp_[i] = h * (hi - lo);
    }

    weights(y, std::span<const double>(y_new.data(), y_new.size()), std::span<double>(sc_));
    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (sc_[i] > 0.0) err = std::max(err, std::abs(tmp_[i]) / sc_[i]);
    }
    return err;
  }

 private:
  std::size_t n_;
  std::array<std::vector<double>, 12> k_;
  std::vector<double> tmp_;
  std::vector<double> sc_;
};

/// Step-size update: shrink by 0.9 err^{-1/8} (at least 1/5) after a
/// rejection, grow by 0.9 err^{-1/9} (at most 5) when err < 1/2, and keep h
/// otherwise. No growth right after a rejection.
struct StepController {
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 5.0;

  double next(double h, double err, bool after_reject) const {
    if (!std::isfinite(err)) return h * min_factor;
    if (err > 1.0) {
      return h * std::max(min_factor, safety * std::pow(err, -1.0 / Rk8pdStepper::kOrder));
    }
    if (after_reject || err >= 0.5) return h;
    const double factor = err > 0.0 ? safety * std::pow(err, -1.0 / (Rk8pdStepper::kOrder + 1)) : max_factor;
    return h * std::clamp(factor, 1.0, max_factor);
  }
};

}  // namespace hgm
