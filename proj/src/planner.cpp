#include "sdecv/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "sdecv/errors.hpp"

namespace sdecv {

std::string to_string(Approach approach) {
    switch (approach) {
        case Approach::Smc: return "smc";
        case Approach::Mlmc: return "mlmc";
        case Approach::Integral: return "integral";
        case Approach::Series: return "series";
    }
    return "unknown";
}

Approach parse_approach(std::string_view text) {
    if (text == "smc") return Approach::Smc;
    if (text == "mlmc") return Approach::Mlmc;
    if (text == "integral") return Approach::Integral;
    if (text == "series") return Approach::Series;
    throw ConfigError("unknown approach '" + std::string(text) + "'");
}

std::int64_t basis_count(int p, int d) {
    if (p < 0 || d < 0) throw PreconditionError("basis_count: negative argument");
    // C(p+d, p) built incrementally; every partial product is an integer.
    std::int64_t c = 1;
    for (int i = 1; i <= p; ++i) c = c * (d + i) / i;
    return c;
}

namespace {

std::int64_t ceil_count(double value) {
    if (!std::isfinite(value) || value > 9.0e18) throw PlanError("planned count is not representable");
    return static_cast<std::int64_t>(std::ceil(value));
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void check_epsilon(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw PlanError("epsilon must lie in (0, 1), got " + fmt(eps));
}

/// Exponents of the complexity solutions have the form (a nu + b) / D with
/// D = d nu + 2(p+1)(d + 2 nu); for infinite nu only a / (d + 4(p+1)) survives.
struct ExponentForm {
    double d, P, nu;
    bool infinite;
    double operator()(double a, double b) const {
        if (infinite) return a / (d + 4.0 * P);
        return (a * nu + b) / (d * nu + 2.0 * P * (d + 2.0 * nu));
    }
};

/// Everything the two solutions share once their exponents are tabulated.
struct SolutionExponents {
    // Q
    double q_b, q_d, q_m, q_eps, q_c, q_fact;
    // N (N0 differs only in the c exponent)
    double n_b, n_d, n_m, n_eps, n_c, n0_c, n_fact;
    // R
    double r_b, r_fact, r_m, r_eps, r_c, r_d;
    double complexity;
};

Plan assemble(const PlanInputs& in, const SolutionExponents& e, bool log_factor) {
    const double eps = in.epsilon;
    const double d = in.d, m = in.m;
    const double c = static_cast<double>(basis_count(in.p, in.d));
    const double fact = factorial(in.p + 1);
    const double b = std::isinf(in.nu) ? 1.0 : in.b_nu;
    const double inv_eps = 1.0 / eps;

    const double q = std::pow(b, e.q_b) * std::pow(d, e.q_d) * std::pow(m, e.q_m) *
                     std::pow(inv_eps, e.q_eps) * std::pow(c, -e.q_c) * std::pow(fact, -e.q_fact);
    const double common = std::pow(b, e.n_b) * std::pow(d, e.n_d) * std::pow(m, e.n_m) *
                          std::pow(fact, -e.n_fact);
    const double n_const = common * std::pow(c, -e.n_c);
    const double n0_const = common * std::pow(c, e.n0_c);
    const double r = std::pow(b, e.r_b) * std::pow(fact, e.r_fact) * std::pow(m, e.r_m) *
                     std::pow(inv_eps, e.r_eps) * std::pow(c, -e.r_c) * std::pow(d, -e.r_d);

    double scale = std::pow(inv_eps, e.n_eps) * in.multiplier;
    if (log_factor) scale *= std::sqrt(e.n_eps * std::log(inv_eps));

    Plan plan;
    plan.approach = in.approach;
    plan.epsilon = eps;
    plan.p = in.p;
    plan.J = ceil_count(inv_eps);
    plan.N = std::max<std::int64_t>(1, ceil_count(n_const * scale));
    plan.N0 = std::max<std::int64_t>(2, ceil_count(n0_const * scale));
    plan.Q = std::max<std::int64_t>(1, ceil_count(q));
    plan.R = r;
    plan.n_exponent = e.n_eps;
    plan.n_constant = n_const;
    plan.n0_constant = n0_const;
    plan.complexity_exponent = e.complexity;
    return plan;
}

}  // namespace

void check_plan_inputs(const PlanInputs& in) {
    check_epsilon(in.epsilon);
    if (in.d <= 0 || in.m <= 0) throw PlanError("d and m must be positive");
    if (in.p < 0) throw PlanError("p must be nonnegative");
    if (!(in.nu > 0.0)) throw PlanError("nu must be positive");
    if (!(in.b_nu > 0.0)) throw PlanError("B_nu must be positive");
    if (!(in.multiplier > 0.0)) throw PlanError("multiplier must be positive");
    if (in.approach != Approach::Integral && in.approach != Approach::Series) return;

    const double P = in.p + 1.0;
    if (!(2.0 * P > in.d))
        throw PlanError("constraint 2(p+1) > d violated: 2(p+1) = " + fmt(2.0 * P) + ", d = " + fmt(in.d));
    const double bound = in.approach == Approach::Integral ? 2.0 * in.d * P / (2.0 * P - in.d)
                                                           : 2.0 * P / (2.0 * P - in.d);
    if (!(in.nu > bound)) {
        const char* lhs = in.approach == Approach::Integral ? "nu > 2d(p+1)/(2(p+1)-d)" : "nu > 2(p+1)/(2(p+1)-d)";
        throw PlanError(std::string("constraint ") + lhs + " violated: nu = " + fmt(in.nu) +
                        ", bound = " + fmt(bound));
    }
}

Plan plan_integral(const PlanInputs& in_raw) {
    PlanInputs in = in_raw;
    in.approach = Approach::Integral;
    check_plan_inputs(in);
    const double d = in.d, P = in.p + 1.0;
    const ExponentForm ex{d, P, in.nu, std::isinf(in.nu)};

    SolutionExponents e{};
    e.q_b = ex(0, 4 * P);
    e.q_d = ex(2 + 4 * P, 4 * P);
    e.q_m = ex(1, 2 * P);
    e.q_eps = ex(2, 4 * P);
    e.q_c = ex(2, 4 * P);
    e.q_fact = ex(4, 0);

    e.n_b = ex(0, 2 * d * P);
    e.n_d = ex(2 * d + 2 * P * (d + 2), 4 * d * P);
    e.n_m = ex(d + 2 * P, 2 * P * d);
    e.n_eps = ex(2 * d + 4 * P, 4 * P * d);
    e.n_c = ex(d, 2 * d * P);
    e.n0_c = ex(4 * P, 0);
    e.n_fact = ex(2 * d, 0);

    e.r_b = ex(0, d + 4 * P);
    e.r_fact = ex(0, 2 * d);
    e.r_m = ex(0, 2 * P);
    e.r_eps = ex(0, 4 * P);
    e.r_c = ex(0, 4 * P);
    e.r_d = ex(0, 2 * P * (d - 2));

    e.complexity = ex(5 * d + 8 * P, 10 * P * d);
    return assemble(in, e, in.log_correction);
}

Plan plan_series(const PlanInputs& in_raw) {
    PlanInputs in = in_raw;
    in.approach = Approach::Series;
    check_plan_inputs(in);
    const double d = in.d, P = in.p + 1.0;
    const ExponentForm ex{d, P, in.nu, std::isinf(in.nu)};

    SolutionExponents e{};
    e.q_b = ex(0, 4 * P);
    e.q_d = ex(4 * P, 0);
    e.q_m = ex(1, 2 * P);
    e.q_eps = ex(3, 2 * P);
    e.q_c = ex(2, 4 * P);
    e.q_fact = ex(4, 0);

    e.n_b = ex(0, 2 * d * P);
    e.n_d = ex(2 * d * P, 0);
    e.n_m = ex(d + 2 * P, 2 * P * d);
    e.n_eps = ex(3 * d + 6 * P, 4 * P * d);
    e.n_c = ex(d, 2 * d * P);
    e.n0_c = ex(4 * P, 0);
    e.n_fact = ex(2 * d, 0);

    e.r_b = ex(0, d + 4 * P);
    e.r_fact = ex(0, 2 * d);
    e.r_m = ex(0, 2 * P);
    e.r_eps = ex(0, 2 * P - d);
    e.r_c = ex(0, 4 * P);
    e.r_d = ex(0, 2 * d * P);

    e.complexity = ex(7 * d + 10 * P, 8 * P * d);
    return assemble(in, e, false);
}

Plan plan_smc(const PlanInputs& in) {
    check_epsilon(in.epsilon);
    if (!(in.multiplier > 0.0)) throw PlanError("multiplier must be positive");
    Plan plan;
    plan.approach = Approach::Smc;
    plan.epsilon = in.epsilon;
    plan.p = in.p;
    plan.J = ceil_count(1.0 / in.epsilon);
    plan.N0 = std::max<std::int64_t>(2, ceil_count(in.multiplier / (in.epsilon * in.epsilon)));
    plan.n0_constant = in.multiplier;
    plan.complexity_exponent = 3.0;
    return plan;
}

double complexity_exponent(const PlanInputs& in) {
    if (in.approach == Approach::Smc) return 3.0;
    if (in.approach == Approach::Mlmc) throw PlanError("MLMC chooses its levels adaptively and has no static plan");
    check_plan_inputs(in);
    const double d = in.d, P = in.p + 1.0;
    const ExponentForm ex{d, P, in.nu, std::isinf(in.nu)};
    return in.approach == Approach::Integral ? ex(5 * d + 8 * P, 10 * P * d) : ex(7 * d + 10 * P, 8 * P * d);
}

Plan plan(const PlanInputs& in) {
    switch (in.approach) {
        case Approach::Integral: return plan_integral(in);
        case Approach::Series: return plan_series(in);
        case Approach::Smc: return plan_smc(in);
        case Approach::Mlmc: break;
    }
    throw PlanError("MLMC chooses its levels adaptively and has no static plan");
}

namespace {

Plan paper_recipe(double eps, Approach approach, double n_const, double n0_const, double exponent,
                  std::int64_t outer) {
    check_epsilon(eps);
    Plan plan;
    plan.approach = approach;
    plan.epsilon = eps;
    plan.p = 3;
    plan.J = ceil_count(1.0 / eps);
    if (approach == Approach::Smc) {
        plan.N0 = ceil_count(256.0 / (eps * eps));
        plan.complexity_exponent = 3.0;
        return plan;
    }
    const double scale = std::pow(1.0 / eps, exponent);
    plan.N = outer * ceil_count(n_const * scale);
    plan.N0 = outer * ceil_count(n0_const * scale);
    plan.n_exponent = exponent;
    plan.n_constant = n_const;
    plan.n0_constant = n0_const;
    return plan;
}

void require_static(Approach approach) {
    if (approach == Approach::Mlmc) throw PlanError("MLMC chooses its levels adaptively and has no static plan");
}

}  // namespace

Plan plan_paper_1d(double eps, Approach approach) {
    require_static(approach);
    if (approach == Approach::Integral) return paper_recipe(eps, approach, 0.6342, 2.5367, 1.0588, 256);
    if (approach == Approach::Series) return paper_recipe(eps, approach, 0.6342, 2.5367, 1.5882, 256);
    return paper_recipe(eps, approach, 0, 0, 0, 0);
}

Plan plan_paper_5d(double eps, Approach approach) {
    require_static(approach);
    if (approach == Approach::Integral) return paper_recipe(eps, approach, 35.9733, 2014.5030, 1.2381, 1);
    if (approach == Approach::Series) return paper_recipe(eps, approach, 4.9044, 274.6480, 1.8571, 4);
    return paper_recipe(eps, approach, 0, 0, 0, 0);
}

}  // namespace sdecv
