#include "test_support.hpp"

#include <algorithm>
#include <cmath>

#include "sdecv/models.hpp"
#include "sdecv/rng.hpp"

namespace testing_models {

using sdecv::Matrix;
using sdecv::RowVector;
using sdecv::SdeModel;
using sdecv::Vector;

SdeModel linear_scalar(double a, double b, double x0) {
    SdeModel m;
    m.name = "linear";
    m.x0 = Vector::Constant(1, x0);
    m.drift = [a](const Vector& x, Vector& out) { out(0) = a * x(0); };
    m.diffusion = [b](const Vector& x, Matrix& out) { out(0, 0) = b * x(0); };
    m.drift_jacobian = [a](const Vector&, Matrix& out) { out(0, 0) = a; };
    m.diffusion_row_jacobians = [b](const Vector&, std::vector<Matrix>& out) { out[0](0, 0) = b; };
    m.payoff = [](const Vector& x) { return x(0); };
    m.payoff_gradient = [](const Vector&, RowVector& out) { out(0) = 1.0; };
    return m;
}

SdeModel constant_coefficients(double c, double s, double slope) {
    SdeModel m;
    m.name = "constant";
    m.x0 = Vector::Zero(1);
    m.drift = [c](const Vector&, Vector& out) { out(0) = c; };
    m.diffusion = [s](const Vector&, Matrix& out) { out(0, 0) = s; };
    m.drift_jacobian = [](const Vector&, Matrix& out) { out(0, 0) = 0.0; };
    m.diffusion_row_jacobians = [](const Vector&, std::vector<Matrix>& out) { out[0](0, 0) = 0.0; };
    m.payoff = [slope](const Vector& x) { return slope * x(0); };
    m.payoff_gradient = [slope](const Vector&, RowVector& out) { out(0) = slope; };
    return m;
}

SdeModel random_smooth_2d(std::uint64_t seed) {
    constexpr int d = 2, q = 3;
    sdecv::RngStream rng(seed, 99);
    auto draw = [&rng](double scale) { return scale * (2.0 * rng.uniform() - 1.0); };
    Matrix A(d, d);
    Vector b(d), w(d);
    Matrix C(d, q), D(d, q);
    std::vector<Matrix> E(d, Matrix(q, d));  // E[k].row(i) = e_ki
    for (int k = 0; k < d; ++k) {
        b(k) = draw(0.5);
        w(k) = draw(2.0);
        for (int l = 0; l < d; ++l) A(k, l) = draw(0.7);
        for (int i = 0; i < q; ++i) {
            C(k, i) = draw(0.6);
            D(k, i) = draw(0.4);
            for (int l = 0; l < d; ++l) E[k](i, l) = draw(1.0);
        }
    }

    SdeModel m;
    m.name = "random2d";
    m.d = d;
    m.m = q;
    m.x0 = Vector(d);
    m.x0 << draw(0.5), draw(0.5);
    m.horizon = 1.0;
    m.drift = [A, b](const Vector& x, Vector& out) { out = A * x + b.cwiseProduct(x.array().sin().matrix()); };
    m.drift_jacobian = [A, b](const Vector& x, Matrix& out) {
        out = A;
        for (int k = 0; k < 2; ++k) out(k, k) += b(k) * std::cos(x(k));
    };
    m.diffusion = [C, D, E](const Vector& x, Matrix& out) {
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 3; ++i) out(k, i) = C(k, i) + D(k, i) * std::tanh(E[k].row(i).dot(x));
    };
    m.diffusion_row_jacobians = [D, E](const Vector& x, std::vector<Matrix>& out) {
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 3; ++i) {
                const double t = std::tanh(E[k].row(i).dot(x));
                out[k].row(i) = D(k, i) * (1.0 - t * t) * E[k].row(i);
            }
    };
    m.payoff = [w](const Vector& x) { return w.dot(x.array().sin().matrix()) + x(0) * x(1); };
    m.payoff_gradient = [w](const Vector& x, RowVector& out) {
        out(0) = w(0) * std::cos(x(0)) + x(1);
        out(1) = w(1) * std::cos(x(1)) + x(0);
    };
    return m;
}

SdeModel sech1d_with_wrong_jacobian() {
    SdeModel m = sdecv::make_sech1d();
    auto right = m.diffusion_row_jacobians;
    m.diffusion_row_jacobians = [right](const Vector& x, std::vector<Matrix>& out) {
        right(x, out);
        out[0] *= 1.5;
    };
    return m;
}

std::vector<RowVector> explicit_inverse_sensitivities(const SdeModel& model, const sdecv::TimeGrid& grid,
                                                      const sdecv::PathBundle& bundle) {
    const int J = bundle.steps();
    std::vector<Matrix> tangent(static_cast<std::size_t>(J + 1));
    tangent[0] = Matrix::Identity(model.d, model.d);
    for (int j = 1; j <= J; ++j) {
        const Vector x = bundle.states.row(j - 1).transpose();
        const Vector dw = bundle.increments.row(j - 1).transpose();
        tangent[j] = sdecv::propagator_matrix(model, x, grid.delta(), dw) * tangent[j - 1];
    }
    RowVector grad(model.d);
    model.payoff_gradient(bundle.terminal(), grad);
    std::vector<RowVector> out;
    for (int j = 1; j <= J; ++j) out.push_back(grad * tangent[J] * tangent[j].inverse());
    return out;
}

namespace {

struct Restart {
    SdeModel model;
    sdecv::TimeGrid grid;
};

Restart restart_at(const SdeModel& model, const sdecv::TimeGrid& grid, int j, const Vector& x) {
    SdeModel restarted = model;
    restarted.x0 = x;
    const int remaining = grid.steps() - j + 1;
    restarted.horizon = grid.delta() * remaining;
    return {restarted, sdecv::TimeGrid(remaining, restarted.horizon)};
}

MeanEstimate summarize(double sum, double sum2, std::int64_t n) {
    const double mean = sum / static_cast<double>(n);
    const double var = (sum2 - sum * mean) / static_cast<double>(n - 1);
    return {mean, std::sqrt(std::max(0.0, var) / static_cast<double>(n))};
}

}  // namespace

MeanEstimate restarted_integral_oracle(const SdeModel& model, const sdecv::TimeGrid& grid, int j, const Vector& x,
                                       int component, std::int64_t paths, std::uint64_t seed, bool raw_zeta) {
    const Restart r = restart_at(model, grid, j, x);
    Matrix sigma(model.d, model.m);
    model.diffusion(x, sigma);
    sdecv::StepWorkspace ws(r.model);
    sdecv::PathBundle bundle;
    const sdecv::RngStream streams(seed, 0);
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t n = 0; n < paths; ++n) {
        sdecv::RngStream rng = streams.substream(static_cast<std::uint64_t>(n));
        sdecv::simulate_path(r.model, r.grid, rng, true, ws, bundle);
        const RowVector& zeta = (*bundle.sensitivities)[0];
        const double v = raw_zeta ? zeta(component) : grid.sqrt_delta() * zeta.dot(sigma.col(component));
        sum += v;
        sum2 += v * v;
    }
    return summarize(sum, sum2, paths);
}

MeanEstimate restarted_series_oracle(const SdeModel& model, const sdecv::TimeGrid& grid, int j, const Vector& x,
                                     int component, std::int64_t paths, std::uint64_t seed) {
    const Restart r = restart_at(model, grid, j, x);
    sdecv::StepWorkspace ws(r.model);
    sdecv::PathBundle bundle;
    const sdecv::RngStream streams(seed, 0);
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t n = 0; n < paths; ++n) {
        sdecv::RngStream rng = streams.substream(static_cast<std::uint64_t>(n));
        sdecv::simulate_path(r.model, r.grid, rng, false, ws, bundle);
        const double v = model.payoff(bundle.terminal()) * bundle.increments(0, component) / grid.sqrt_delta();
        sum += v;
        sum2 += v * v;
    }
    return summarize(sum, sum2, paths);
}

}  // namespace testing_models
