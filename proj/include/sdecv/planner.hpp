#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "sdecv/approach.hpp"

namespace sdecv {

inline constexpr double kInfiniteNu = std::numeric_limits<double>::infinity();

/// Inputs of the asymptotic parameter choice. `nu` is the tail exponent of
/// P(|X|_inf > R) <= B_nu R^-nu and may be infinite (compactly supported
/// process), in which case every exponent is replaced by its limit.
struct PlanInputs {
    double epsilon = 0.25;
    int d = 1;
    int m = 1;
    int p = 3;
    double nu = kInfiniteNu;
    double b_nu = 1.0;
    Approach approach = Approach::Integral;
    /// Absolute constant applied to N and N0 (the asymptotics fix none).
    double multiplier = 1.0;
    /// Apply the sqrt(log) factor of the integral approach to N and N0.
    bool log_correction = true;
};

struct Plan {
    Approach approach = Approach::Integral;
    double epsilon = 0.0;
    int p = 3;
    std::int64_t J = 0;
    std::int64_t N = 0;   // training paths, 0 for SMC
    std::int64_t N0 = 0;  // testing paths
    std::optional<std::int64_t> Q;  // cells per axis; empty for the global basis
    std::optional<double> R;        // partition half-width; empty for the global basis

    // Unrounded ingredients, reported for inspection.
    double n_exponent = 0.0;        // N ~ n_constant * eps^-n_exponent (before log factor)
    double n_constant = 0.0;
    double n0_constant = 0.0;
    double complexity_exponent = 0.0;  // cost ~ eps^-complexity_exponent
};

/// Binomial coefficient C(p+d, p).
std::int64_t basis_count(int p, int d);

/// Throws PlanError naming the violated inequality.
void check_plan_inputs(const PlanInputs& in);

/// Complexity-optimal (J, Q, N, N0, R) for the integral approach.
Plan plan_integral(const PlanInputs& in);
/// Same for the series approach (no log factor).
Plan plan_series(const PlanInputs& in);
/// Plain Monte Carlo: J = ceil(1/eps), N0 = ceil(multiplier * eps^-2).
Plan plan_smc(const PlanInputs& in);
/// Exponent of eps^-1 in the cost of the integral or series plan, without
/// building the plan (usable where the constants overflow, e.g. huge p).
double complexity_exponent(const PlanInputs& in);
/// Dispatches on in.approach (MLMC is adaptive and has no plan).
Plan plan(const PlanInputs& in);

/// Fixed recipes of the published one-dimensional experiment (p = 3, global basis).
Plan plan_paper_1d(double epsilon, Approach approach);
/// Fixed recipes of the published five-dimensional experiment (p = 3, global basis).
Plan plan_paper_5d(double epsilon, Approach approach);

/// Initial level-0 path counts of the published MLMC runs.
inline constexpr std::int64_t kPaperMlmcInitialPaths1d = 1000;
inline constexpr std::int64_t kPaperMlmcInitialPaths5d = 10000;
inline constexpr int kPaperMlmcRefinement = 4;

}  // namespace sdecv
