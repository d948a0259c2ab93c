#include "sdecv/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdecv/basis.hpp"
#include "sdecv/control_variates.hpp"
#include "sdecv/estimators.hpp"
#include "sdecv/hermite.hpp"

namespace sdecv {

namespace {

double relative_error(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

std::string describe(const char* label, double value) {
    std::ostringstream os;
    os << label << '=' << value;
    return os.str();
}

std::vector<Vector> probe_points(const SdeModel& model, std::uint64_t seed) {
    RngStream rng(seed, 7);
    std::vector<Vector> points;
    for (int i = 0; i < 8; ++i) {
        Vector x = model.x0;
        for (int k = 0; k < model.d; ++k) x(k) += rng.gaussian();
        points.push_back(x);
    }
    return points;
}

CheckResult check_drift_jacobian(const SdeModel& model, const std::vector<Vector>& points) {
    double worst = 0.0;
    Matrix jac(model.d, model.d);
    Vector up(model.d), down(model.d);
    for (const Vector& x : points) {
        model.drift_jacobian(x, jac);
        for (int l = 0; l < model.d; ++l) {
            Vector xp = x, xm = x;
            xp(l) += kFdStep;
            xm(l) -= kFdStep;
            model.drift(xp, up);
            model.drift(xm, down);
            for (int k = 0; k < model.d; ++k)
                worst = std::max(worst, relative_error(jac(k, l), (up(k) - down(k)) / (2 * kFdStep)));
        }
    }
    return {"jacobian-fd-drift", worst <= kFdTolerance, describe("max_rel_err", worst)};
}

CheckResult check_diffusion_jacobian(const SdeModel& model, const std::vector<Vector>& points) {
    double worst = 0.0;
    std::vector<Matrix> jacs(static_cast<std::size_t>(model.d), Matrix(model.m, model.d));
    Matrix up(model.d, model.m), down(model.d, model.m);
    for (const Vector& x : points) {
        model.diffusion_row_jacobians(x, jacs);
        for (int l = 0; l < model.d; ++l) {
            Vector xp = x, xm = x;
            xp(l) += kFdStep;
            xm(l) -= kFdStep;
            model.diffusion(xp, up);
            model.diffusion(xm, down);
            for (int k = 0; k < model.d; ++k)
                for (int i = 0; i < model.m; ++i)
                    worst = std::max(worst, relative_error(jacs[k](i, l), (up(k, i) - down(k, i)) / (2 * kFdStep)));
        }
    }
    return {"jacobian-fd-diffusion", worst <= kFdTolerance, describe("max_rel_err", worst)};
}

CheckResult check_payoff_gradient(const SdeModel& model, const std::vector<Vector>& points) {
    double worst = 0.0;
    RowVector grad(model.d);
    for (const Vector& x : points) {
        model.payoff_gradient(x, grad);
        for (int l = 0; l < model.d; ++l) {
            Vector xp = x, xm = x;
            xp(l) += kFdStep;
            xm(l) -= kFdStep;
            worst = std::max(worst, relative_error(grad(l), (model.payoff(xp) - model.payoff(xm)) / (2 * kFdStep)));
        }
    }
    return {"gradient-fd-payoff", worst <= kFdTolerance, describe("max_rel_err", worst)};
}

CheckResult check_diffusion_shape(const SdeModel& model, const std::vector<Vector>& points) {
    Matrix sigma(model.d, model.m);
    bool ok = true;
    for (const Vector& x : points) {
        model.diffusion(x, sigma);
        ok = ok && sigma.rows() == model.d && sigma.cols() == model.m && sigma.allFinite();
    }
    return {"diffusion-shape", ok, "d=" + std::to_string(model.d) + " m=" + std::to_string(model.m)};
}

CheckResult check_chain_identity(const SdeModel& model, std::uint64_t seed) {
    const TimeGrid grid(8, model.horizon);
    double worst = 0.0;
    for (std::uint64_t n = 0; n < 16; ++n) {
        RngStream rng(seed, 100 + n);
        const PathBundle bundle = simulate_path(model, grid, rng, true);
        const auto& zeta = *bundle.sensitivities;
        const auto& props = *bundle.propagators;
        for (int j = 2; j <= grid.steps(); ++j) {
            const RowVector chained = zeta[j - 1] * props[j - 1];
            const double scale = std::max(1.0, zeta[j - 2].cwiseAbs().maxCoeff());
            worst = std::max(worst, (chained - zeta[j - 2]).cwiseAbs().maxCoeff() / scale);
        }
    }
    return {"chain-identity", worst <= 1e-12, describe("max_rel_err", worst)};
}

CheckResult check_hermite() {
    const GaussHermiteRule rule = gauss_hermite_rule(20);
    double worst = 0.0;
    for (int j = 0; j <= 5; ++j)
        for (int k = 0; k <= 5; ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                sum += rule.weights[i] * hermite(j, rule.nodes[i]) * hermite(k, rule.nodes[i]);
            worst = std::max(worst, std::abs(sum - (j == k ? 1.0 : 0.0)));
        }
    return {"hermite-orthonormality", worst < 1e-10, describe("max_abs_err", worst)};
}

CheckResult check_cv_zero_mean(const SdeModel& model, std::uint64_t seed) {
    const TimeGrid grid(4, model.horizon);
    const BasisSpec spec = global_basis(model.d > 2 ? 2 : 3, model.d, true);
    const std::int64_t training = 50 * (Basis(spec, model.payoff).size() + 1);
    const ControlVariateModel cv = train_integral(model, grid, training, spec, training_streams(seed), {}, 1);
    ControlVariateEvaluator evaluator(cv, model);
    RunningStats stats;
    StepWorkspace ws(model);
    PathBundle bundle;
    const RngStream streams = testing_streams(seed);
    for (std::int64_t n = 0; n < 20000; ++n) {
        RngStream rng = streams.substream(static_cast<std::uint64_t>(n));
        simulate_path(model, grid, rng, false, ws, bundle);
        stats.add(evaluator(bundle));
    }
    const double stderr_ = std::sqrt(stats.variance() / static_cast<double>(stats.count));
    const double z = stderr_ > 0.0 ? std::abs(stats.mean) / stderr_ : 0.0;
    return {"cv-zero-mean", z <= 3.0, describe("abs_mean_over_stderr", z)};
}

}  // namespace

std::vector<CheckResult> validate_model(const SdeModel& model, std::uint64_t seed) {
    check_model(model);
    std::vector<CheckResult> results;
    const std::vector<Vector> points = probe_points(model, seed);
    const bool has_tangents = model.drift_jacobian && model.diffusion_row_jacobians && model.payoff_gradient;
    if (!has_tangents) {
        results.push_back({"derivatives-present", false, "model lacks Jacobians or payoff gradient"});
        return results;
    }
    results.push_back(check_diffusion_shape(model, points));
    results.push_back(check_drift_jacobian(model, points));
    results.push_back(check_diffusion_jacobian(model, points));
    results.push_back(check_payoff_gradient(model, points));
    results.push_back(check_chain_identity(model, seed));
    results.push_back(check_hermite());
    results.push_back(check_cv_zero_mean(model, seed));
    return results;
}

}  // namespace sdecv
