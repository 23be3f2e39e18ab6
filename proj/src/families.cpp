#include "hgm/families.hpp"

#include <cstdint>

#include "hgm/errors.hpp"

namespace hgm {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) { return static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

std::optional<Family> parse_family(std::string_view name) {
  if (name == "hirotsu1") return Family::Hirotsu1;
  if (name == "hirotsu2") return Family::Hirotsu2;
  if (name == "anderson-darling") return Family::AndersonDarling;
  if (name == "chi") return Family::Chi;
  if (name == "exp-product") return Family::ExpProduct;
  return std::nullopt;
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Hirotsu1: return "hirotsu1";
    case Family::Hirotsu2: return "hirotsu2";
    case Family::AndersonDarling: return "anderson-darling";
    case Family::Chi: return "chi";
    case Family::ExpProduct: return "exp-product";
  }
  return "unknown";
}

std::optional<MeanPattern> parse_mean_pattern(std::string_view name) {
  if (name == "zero") return MeanPattern::Zero;
  if (name == "ramp") return MeanPattern::Ramp;
  return std::nullopt;
}

std::string_view to_string(MeanPattern m) { return m == MeanPattern::Zero ? "zero" : "ramp"; }

ModelParams make_family(Family f, int d, MeanPattern mean) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 1");
  if (f == Family::ExpProduct && d % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "exp-product family needs an even dimension");
  }
  const auto D = static_cast<std::uint64_t>(d);
  ModelParams p;
  p.sigma2.resize(D);
  p.mu.assign(D, 0.0);
  for (std::uint64_t k = 1; k <= D; ++k) {
    double s2 = 1.0;
    switch (f) {
      case Family::Hirotsu1: s2 = ratio(D + 1, k * (k + 1)); break;
      case Family::Hirotsu2: s2 = ratio(2 * (D + 2) * (D + 3), k * (k + 1) * (k + 2) * (k + 3)); break;
      case Family::AndersonDarling: s2 = ratio(1, k * (k + 1)); break;
      case Family::Chi: s2 = 1.0; break;
      case Family::ExpProduct: s2 = ratio(1, 2 * ((k + 1) / 2)); break;
    }
    p.sigma2[k - 1] = s2;
    if (mean == MeanPattern::Ramp) p.mu[k - 1] = ratio(k - 1, 100);
  }
  return p;
}

}  // namespace hgm
