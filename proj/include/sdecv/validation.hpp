#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdecv/sde_model.hpp"

namespace sdecv {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Relative finite-difference tolerance and step used by the derivative checks.
inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdTolerance = 1e-5;

/// Invariant suite for a model: Jacobians and payoff gradient against central
/// finite differences, diffusion shape, the backward chain identity,
/// Hermite orthonormality under Gauss quadrature, and the zero mean of a
/// freshly trained integral control variate. Deterministic in `seed`.
std::vector<CheckResult> validate_model(const SdeModel& model, std::uint64_t seed);

}  // namespace sdecv
