#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdecv/approach.hpp"
#include "sdecv/planner.hpp"
#include "sdecv/sde_model.hpp"

namespace sdecv {

/// dX = -1/2 tanh(X) sech^2(X) dt + sech(X) dW, X_0 = 0, T = 1, with
/// f(x) = sech(x) + 15 arctan(x). Exact solution X_t = arsinh(W_t).
///
/// Drift, diffusion and payoff are smooth with bounded derivatives and the
/// diffusion is bounded, so the regularity conditions behind the variance
/// and weak-order results hold.
SdeModel make_sech1d();

/// Five-dimensional model with exact solution X^i = arctan(W^i) (i <= 4),
/// X^5 = sum_i arsinh(W^i) + W^5, and f(x) = cos(sum x) - 20 sum_{i<=4} sin(x_i).
SdeModel make_arctan5d();

/// Published reference values of E f(X_T) (exact solutions, T = 1).
inline constexpr double kSech1dReference = 0.789640;
inline constexpr double kArctan5dReference = 0.002069;

/// Registry entry: model factory plus the experiment defaults that go with it.
struct RegisteredModel {
    std::string key;
    std::function<SdeModel()> make;
    std::optional<double> reference;
    /// Parameter recipe for (epsilon, approach); empty means use the generic planner.
    std::function<Plan(double, Approach)> paper_plan;
    std::int64_t mlmc_initial_paths = 1000;
    std::string assumptions;
};

class ModelRegistry {
  public:
    void add(RegisteredModel entry);
    /// Throws ConfigError("unknown model ...") for unregistered keys.
    const RegisteredModel& at(const std::string& key) const;
    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    std::vector<std::string> keys() const;

  private:
    std::map<std::string, RegisteredModel> entries_;
};

/// "sech1d" and "arctan5d".
const ModelRegistry& default_registry();

}  // namespace sdecv
