#pragma once

// Parameter families used by the benchmarks.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hgm/model.hpp"

namespace hgm {

enum class Family { Hirotsu1, Hirotsu2, AndersonDarling, Chi, ExpProduct };
enum class MeanPattern { Zero, Ramp };

std::optional<Family> parse_family(std::string_view name);
std::string_view to_string(Family f);
std::optional<MeanPattern> parse_mean_pattern(std::string_view name);
std::string_view to_string(MeanPattern m);

/// hirotsu1:         sigma_k^2 = (d+1) / (k(k+1))
/// hirotsu2:         sigma_k^2 = 2(d+2)(d+3) / (k(k+1)(k+2)(k+3))
/// anderson-darling: sigma_k^2 = 1 / (k(k+1))
/// chi:              sigma_k^2 = 1
/// exp-product:      sigma^2 = 1/(2j) for the pair (2j-1, 2j); d must be even
/// The ramp mean is mu_k = 0.01 (k-1).
ModelParams make_family(Family f, int d, MeanPattern mean = MeanPattern::Zero);

}  // namespace hgm
