#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdecv/rng.hpp"

namespace sdecv {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

/// Autonomous Ito SDE  dX = mu(X) dt + sigma(X) dW  on R^d driven by an
/// m-dimensional Brownian motion, together with the payoff f whose
/// expectation E f(X_T) is estimated.
///
/// All callbacks write into caller-provided outputs that are already sized
/// (d, d x m, d x d, ...), so the simulation loops never allocate.
struct SdeModel {
    std::string name;
    int d = 1;
    int m = 1;

    std::function<void(const Vector& x, Vector& out)> drift;
    /// out is d x m.
    std::function<void(const Vector& x, Matrix& out)> diffusion;
    /// out(k, l) = d mu_k / d x_l.
    std::function<void(const Vector& x, Matrix& out)> drift_jacobian;
    /// out has d entries; out[k] is m x d with out[k](i, l) = d sigma_{k,i} / d x_l.
    std::function<void(const Vector& x, std::vector<Matrix>& out)> diffusion_row_jacobians;
    std::function<double(const Vector& x)> payoff;
    /// out is 1 x d.
    std::function<void(const Vector& x, RowVector& out)> payoff_gradient;

    Vector x0;
    double horizon = 1.0;

    /// Draws X_T of the exact solution; empty when no closed form is known.
    std::function<void(RngStream& rng, Vector& out)> exact_terminal_sampler;

    bool has_exact_sampler() const { return static_cast<bool>(exact_terminal_sampler); }
};

/// Equidistant grid t_j = j * delta, j = 0..J, with delta = T / J.
class TimeGrid {
  public:
    TimeGrid(int steps, double horizon);

    int steps() const { return steps_; }
    double horizon() const { return horizon_; }
    double delta() const { return delta_; }
    double sqrt_delta() const { return sqrt_delta_; }
    double time(int j) const;

    bool operator==(const TimeGrid&) const = default;

  private:
    int steps_;
    double horizon_;
    double delta_;
    double sqrt_delta_;
};

/// One Euler trajectory. Row j of `states` is X_{t_j}; row j-1 of
/// `increments` is Delta_j W. When tangents were requested,
/// propagators[j-1] = A_j and sensitivities[j-1] = zeta_j
/// = grad f(X_T) A_J ... A_{j+1}, so sensitivities[J-1] = grad f(X_T).
struct PathBundle {
    Matrix increments;
    Matrix states;
    std::optional<std::vector<Matrix>> propagators;
    std::optional<std::vector<RowVector>> sensitivities;

    int steps() const { return static_cast<int>(increments.rows()); }
    Vector terminal() const { return states.row(states.rows() - 1).transpose(); }

    bool operator==(const PathBundle&) const;
};

/// Scratch buffers sized for one model; reuse across steps and paths.
struct StepWorkspace {
    explicit StepWorkspace(const SdeModel& model);

    Vector mu;
    Matrix sigma;
    Matrix drift_jac;
    std::vector<Matrix> row_jacs;
    Vector x;
    Vector dw;
};

/// Throws ContractViolation if the model's fields are missing or x0 has the wrong size.
void check_model(const SdeModel& model);

/// x + mu(x) delta + sigma(x) dw.
Vector euler_step(const SdeModel& model, const Vector& x, double delta, const Vector& dw);
void euler_step(const SdeModel& model, const Vector& x, double delta, const Vector& dw,
                StepWorkspace& ws, Vector& out);

/// I + J_mu(x) delta + S, where row k of S is dw^T J_{sigma_k}(x).
Matrix propagator_matrix(const SdeModel& model, const Vector& x, double delta, const Vector& dw);
void propagator_matrix(const SdeModel& model, const Vector& x, double delta, const Vector& dw,
                       StepWorkspace& ws, Matrix& out);

/// Simulates one Euler path; increments are i.i.d. N(0, delta I_m) drawn
/// step by step, component by component, from `rng`.
PathBundle simulate_path(const SdeModel& model, const TimeGrid& grid, RngStream& rng,
                         bool with_tangents);
/// Same as above, reusing the storage in `out`.
void simulate_path(const SdeModel& model, const TimeGrid& grid, RngStream& rng,
                   bool with_tangents, StepWorkspace& ws, PathBundle& out);

/// zeta_j = grad f(X_T) A_J ... A_{j+1} for j = 1..J by backward vector-matrix
/// products; element j-1 of the result is zeta_j.
std::vector<RowVector> backward_sensitivities(const SdeModel& model, const PathBundle& bundle);
void backward_sensitivities(const SdeModel& model, const PathBundle& bundle,
                            std::vector<RowVector>& out);

/// One exact sample of X_T. Throws UnsupportedOperation without a sampler.
Vector sample_exact_terminal(const SdeModel& model, RngStream& rng);

/// Replaces the analytic Jacobians and payoff gradient by central finite
/// differences with step `h`. Meant for authoring new models, not for benchmarks.
SdeModel with_finite_difference_derivatives(SdeModel model, double h = 1e-6);

}  // namespace sdecv
