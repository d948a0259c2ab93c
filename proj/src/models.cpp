#include "sdecv/models.hpp"

#include <cmath>

#include "sdecv/errors.hpp"

namespace sdecv {

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

}  // namespace

SdeModel make_sech1d() {
    SdeModel model;
    model.name = "sech1d";
    model.d = 1;
    model.m = 1;
    model.x0 = Vector::Zero(1);
    model.horizon = 1.0;

    model.drift = [](const Vector& x, Vector& out) {
        const double s = sech(x(0));
        out(0) = -0.5 * std::tanh(x(0)) * s * s;
    };
    model.diffusion = [](const Vector& x, Matrix& out) { out(0, 0) = sech(x(0)); };
    // d/dx [-1/2 tanh sech^2] = -1/2 sech^2 (sech^2 - 2 tanh^2)
    model.drift_jacobian = [](const Vector& x, Matrix& out) {
        const double s2 = sech(x(0)) * sech(x(0));
        const double t = std::tanh(x(0));
        out(0, 0) = -0.5 * s2 * (s2 - 2.0 * t * t);
    };
    model.diffusion_row_jacobians = [](const Vector& x, std::vector<Matrix>& out) {
        out[0](0, 0) = -sech(x(0)) * std::tanh(x(0));
    };
    model.payoff = [](const Vector& x) { return sech(x(0)) + 15.0 * std::atan(x(0)); };
    model.payoff_gradient = [](const Vector& x, RowVector& out) {
        out(0) = -sech(x(0)) * std::tanh(x(0)) + 15.0 / (1.0 + x(0) * x(0));
    };
    model.exact_terminal_sampler = [T = model.horizon](RngStream& rng, Vector& out) {
        out(0) = std::asinh(std::sqrt(T) * rng.gaussian());
    };
    return model;
}

SdeModel make_arctan5d() {
    SdeModel model;
    model.name = "arctan5d";
    model.d = 5;
    model.m = 5;
    model.x0 = Vector::Zero(5);
    model.horizon = 1.0;

    model.drift = [](const Vector& x, Vector& out) {
        out(4) = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double s = std::sin(x(i)), c = std::cos(x(i));
            out(i) = -s * c * c * c;
            out(4) += -0.5 * s * c * c;
        }
    };
    model.diffusion = [](const Vector& x, Matrix& out) {
        out.setZero();
        for (int i = 0; i < 4; ++i) {
            const double c = std::cos(x(i));
            out(i, i) = c * c;
            out(4, i) = c;
        }
        out(4, 4) = 1.0;
    };
    model.drift_jacobian = [](const Vector& x, Matrix& out) {
        out.setZero();
        for (int i = 0; i < 4; ++i) {
            const double s = std::sin(x(i)), c = std::cos(x(i));
            out(i, i) = -c * c * c * c + 3.0 * s * s * c * c;
            out(4, i) = -0.5 * (c * c * c - 2.0 * s * s * c);
        }
    };
    model.diffusion_row_jacobians = [](const Vector& x, std::vector<Matrix>& out) {
        for (auto& jac : out) jac.setZero();
        for (int i = 0; i < 4; ++i) {
            const double s = std::sin(x(i)), c = std::cos(x(i));
            out[i](i, i) = -2.0 * s * c;
            out[4](i, i) = -s;
        }
    };
    model.payoff = [](const Vector& x) {
        double value = std::cos(x.sum());
        for (int i = 0; i < 4; ++i) value -= 20.0 * std::sin(x(i));
        return value;
    };
    model.payoff_gradient = [](const Vector& x, RowVector& out) {
        const double s = -std::sin(x.sum());
        for (int i = 0; i < 4; ++i) out(i) = s - 20.0 * std::cos(x(i));
        out(4) = s;
    };
    model.exact_terminal_sampler = [T = model.horizon](RngStream& rng, Vector& out) {
        const double scale = std::sqrt(T);
        out(4) = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double w = scale * rng.gaussian();
            out(i) = std::atan(w);
            out(4) += std::asinh(w);
        }
        out(4) += scale * rng.gaussian();
    };
    return model;
}

void ModelRegistry::add(RegisteredModel entry) {
    const std::string key = entry.key;
    entries_.insert_or_assign(key, std::move(entry));
}

const RegisteredModel& ModelRegistry::at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("unknown model '" + key + "'");
    return it->second;
}

std::vector<std::string> ModelRegistry::keys() const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : entries_) out.push_back(key);
    return out;
}

const ModelRegistry& default_registry() {
    static const ModelRegistry registry = [] {
        ModelRegistry r;
        r.add({"sech1d", make_sech1d, kSech1dReference, plan_paper_1d, kPaperMlmcInitialPaths1d,
               "mu, sigma, f smooth with bounded derivatives of all orders; sigma bounded by 1"});
        r.add({"arctan5d", make_arctan5d, kArctan5dReference, plan_paper_5d, kPaperMlmcInitialPaths5d,
               "mu, sigma, f smooth with bounded derivatives; sigma bounded"});
        return r;
    }();
    return registry;
}

}  // namespace sdecv
