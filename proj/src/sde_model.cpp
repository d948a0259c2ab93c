#include "sdecv/sde_model.hpp"

#include <cmath>

#include "sdecv/errors.hpp"

namespace sdecv {

TimeGrid::TimeGrid(int steps, double horizon)
    : steps_(steps),
      horizon_(horizon),
      delta_(horizon / steps),
      sqrt_delta_(std::sqrt(horizon / steps)) {
    if (steps <= 0) throw PreconditionError("TimeGrid: number of steps must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw PreconditionError("TimeGrid: horizon must be positive and finite");
}

double TimeGrid::time(int j) const {
    if (j < 0 || j > steps_) throw PreconditionError("TimeGrid: index out of range");
    if (j == steps_) return horizon_;
    return j * delta_;
}

bool PathBundle::operator==(const PathBundle& other) const {
    auto same = [](const Matrix& a, const Matrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    if (!same(increments, other.increments) || !same(states, other.states)) return false;
    if (propagators.has_value() != other.propagators.has_value()) return false;
    if (propagators) {
        if (propagators->size() != other.propagators->size()) return false;
        for (std::size_t i = 0; i < propagators->size(); ++i)
            if (!same((*propagators)[i], (*other.propagators)[i])) return false;
    }
    if (sensitivities.has_value() != other.sensitivities.has_value()) return false;
    if (sensitivities) {
        if (sensitivities->size() != other.sensitivities->size()) return false;
        for (std::size_t i = 0; i < sensitivities->size(); ++i)
            if ((*sensitivities)[i] != (*other.sensitivities)[i]) return false;
    }
    return true;
}

StepWorkspace::StepWorkspace(const SdeModel& model)
    : mu(model.d),
      sigma(model.d, model.m),
      drift_jac(model.d, model.d),
      row_jacs(static_cast<std::size_t>(model.d), Matrix(model.m, model.d)),
      x(model.d),
      dw(model.m) {}

void check_model(const SdeModel& model) {
    if (model.d <= 0 || model.m <= 0) throw ContractViolation("SdeModel: d and m must be positive");
    if (!model.drift || !model.diffusion || !model.payoff)
        throw ContractViolation("SdeModel '" + model.name + "': drift, diffusion and payoff are required");
    if (model.x0.size() != model.d) throw ContractViolation("SdeModel '" + model.name + "': x0 must have length d");
    if (!(model.horizon > 0.0)) throw ContractViolation("SdeModel '" + model.name + "': horizon must be positive");
}

namespace {

void check_step_args(const SdeModel& model, const Vector& x, double delta, const Vector& dw) {
    if (x.size() != model.d) throw ContractViolation("state has length " + std::to_string(x.size()) +
                                                     ", model dimension is " + std::to_string(model.d));
    if (dw.size() != model.m)
        throw ContractViolation("Brownian increment has length " + std::to_string(dw.size()) +
                                ", model expects " + std::to_string(model.m));
    if (!(delta > 0.0)) throw PreconditionError("time step must be positive");
}

void require_tangent_fields(const SdeModel& model) {
    if (!model.drift_jacobian || !model.diffusion_row_jacobians)
        throw ContractViolation("SdeModel '" + model.name + "' has no Jacobians");
}

}  // namespace

void euler_step(const SdeModel& model, const Vector& x, double delta, const Vector& dw,
                StepWorkspace& ws, Vector& out) {
    model.drift(x, ws.mu);
    model.diffusion(x, ws.sigma);
    out.resize(model.d);
    out.noalias() = x + delta * ws.mu;
    out.noalias() += ws.sigma * dw;
}

Vector euler_step(const SdeModel& model, const Vector& x, double delta, const Vector& dw) {
    check_step_args(model, x, delta, dw);
    StepWorkspace ws(model);
    Vector out(model.d);
    euler_step(model, x, delta, dw, ws, out);
    if (ws.sigma.rows() != model.d || ws.sigma.cols() != model.m)
        throw ContractViolation("diffusion must return a d x m matrix");
    return out;
}

void propagator_matrix(const SdeModel& model, const Vector& x, double delta, const Vector& dw,
                       StepWorkspace& ws, Matrix& out) {
    model.drift_jacobian(x, ws.drift_jac);
    model.diffusion_row_jacobians(x, ws.row_jacs);
    out.resize(model.d, model.d);
    out.noalias() = delta * ws.drift_jac;
    out.diagonal().array() += 1.0;
    for (int k = 0; k < model.d; ++k) out.row(k).noalias() += dw.transpose() * ws.row_jacs[k];
}

Matrix propagator_matrix(const SdeModel& model, const Vector& x, double delta, const Vector& dw) {
    check_step_args(model, x, delta, dw);
    require_tangent_fields(model);
    StepWorkspace ws(model);
    Matrix out;
    propagator_matrix(model, x, delta, dw, ws, out);
    return out;
}

void simulate_path(const SdeModel& model, const TimeGrid& grid, RngStream& rng, bool with_tangents,
                   StepWorkspace& ws, PathBundle& out) {
    const int steps = grid.steps();
    const double delta = grid.delta();
    const double scale = grid.sqrt_delta();
    out.increments.resize(steps, model.m);
    out.states.resize(steps + 1, model.d);
    out.states.row(0) = model.x0.transpose();
    if (with_tangents) {
        require_tangent_fields(model);
        if (!out.propagators) out.propagators.emplace();
        out.propagators->resize(static_cast<std::size_t>(steps));
    } else {
        out.propagators.reset();
        out.sensitivities.reset();
    }

    Vector next(model.d);
    ws.x = model.x0;
    for (int j = 1; j <= steps; ++j) {
        for (int i = 0; i < model.m; ++i) ws.dw(i) = scale * rng.gaussian();
        out.increments.row(j - 1) = ws.dw.transpose();
        if (with_tangents) propagator_matrix(model, ws.x, delta, ws.dw, ws, (*out.propagators)[j - 1]);
        euler_step(model, ws.x, delta, ws.dw, ws, next);
        ws.x.swap(next);
        out.states.row(j) = ws.x.transpose();
    }

    if (with_tangents) {
        if (!out.sensitivities) out.sensitivities.emplace();
        backward_sensitivities(model, out, *out.sensitivities);
    }
}

PathBundle simulate_path(const SdeModel& model, const TimeGrid& grid, RngStream& rng, bool with_tangents) {
    check_model(model);
    StepWorkspace ws(model);
    PathBundle out;
    simulate_path(model, grid, rng, with_tangents, ws, out);
    return out;
}

void backward_sensitivities(const SdeModel& model, const PathBundle& bundle, std::vector<RowVector>& out) {
    if (!bundle.propagators) throw PreconditionError("backward_sensitivities: bundle has no propagators");
    if (!model.payoff_gradient) throw ContractViolation("SdeModel '" + model.name + "' has no payoff gradient");
    const auto& props = *bundle.propagators;
    const int steps = bundle.steps();
    if (static_cast<int>(props.size()) != steps)
        throw ContractViolation("backward_sensitivities: propagator count differs from step count");

    out.resize(static_cast<std::size_t>(steps));
    RowVector grad(model.d);
    model.payoff_gradient(bundle.terminal(), grad);
    out[steps - 1] = grad;
    for (int j = steps - 1; j >= 1; --j) out[j - 1].noalias() = out[j] * props[j];
}

std::vector<RowVector> backward_sensitivities(const SdeModel& model, const PathBundle& bundle) {
    std::vector<RowVector> out;
    backward_sensitivities(model, bundle, out);
    return out;
}

Vector sample_exact_terminal(const SdeModel& model, RngStream& rng) {
    if (!model.has_exact_sampler())
        throw UnsupportedOperation("model '" + model.name + "' has no exact terminal sampler");
    Vector out(model.d);
    model.exact_terminal_sampler(rng, out);
    return out;
}

SdeModel with_finite_difference_derivatives(SdeModel model, double h) {
    const int d = model.d;
    const int m = model.m;
    auto drift = model.drift;
    auto diffusion = model.diffusion;
    auto payoff = model.payoff;

    model.drift_jacobian = [=](const Vector& x, Matrix& out) {
        Vector xp = x, xm = x, up(d), um(d);
        for (int l = 0; l < d; ++l) {
            xp(l) = x(l) + h;
            xm(l) = x(l) - h;
            drift(xp, up);
            drift(xm, um);
            out.col(l) = (up - um) / (2.0 * h);
            xp(l) = xm(l) = x(l);
        }
    };
    model.diffusion_row_jacobians = [=](const Vector& x, std::vector<Matrix>& out) {
        Vector xp = x, xm = x;
        Matrix sp(d, m), sm(d, m);
        for (int l = 0; l < d; ++l) {
            xp(l) = x(l) + h;
            xm(l) = x(l) - h;
            diffusion(xp, sp);
            diffusion(xm, sm);
            for (int k = 0; k < d; ++k) out[k].col(l) = ((sp.row(k) - sm.row(k)) / (2.0 * h)).transpose();
            xp(l) = xm(l) = x(l);
        }
    };
    model.payoff_gradient = [=](const Vector& x, RowVector& out) {
        Vector xp = x, xm = x;
        for (int l = 0; l < d; ++l) {
            xp(l) = x(l) + h;
            xm(l) = x(l) - h;
            out(l) = (payoff(xp) - payoff(xm)) / (2.0 * h);
            xp(l) = xm(l) = x(l);
        }
    };
    return model;
}

}  // namespace sdecv
