#pragma once

#include <string>
#include <string_view>

namespace sdecv {

enum class Approach { Smc, Mlmc, Integral, Series };

std::string to_string(Approach approach);
/// Accepts "smc", "mlmc", "integral", "series"; throws ConfigError otherwise.
Approach parse_approach(std::string_view text);

}  // namespace sdecv
