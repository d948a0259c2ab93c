#include <doctest.h>

#include <cmath>
#include <string>

#include "golden_plans.hpp"
#include "sdecv/errors.hpp"
#include "sdecv/planner.hpp"

using namespace sdecv;

namespace {

using golden::PlanRow;

double round4(double x) { return std::round(x * 1e4) / 1e4; }

PlanInputs inputs(int d, int p, double nu, Approach a, double eps = 0.25) {
    PlanInputs in;
    in.epsilon = eps;
    in.d = d;
    in.m = d;
    in.p = p;
    in.nu = nu;
    in.approach = a;
    return in;
}

}  // namespace

TEST_CASE("planner: published one-dimensional recipe") {
    for (const PlanRow& g : golden::kPaper1dIntegral) {
        const Plan p = plan_paper_1d(std::ldexp(1.0, -g.i), Approach::Integral);
        CHECK(p.J == g.J);
        CHECK(p.N == g.N);
        CHECK(p.N0 == g.N0);
        CHECK_FALSE(p.Q.has_value());
        CHECK_FALSE(p.R.has_value());
        CHECK(p.p == 3);
    }
    for (const PlanRow& g : golden::kPaper1dSeries) {
        const Plan p = plan_paper_1d(std::ldexp(1.0, -g.i), Approach::Series);
        CHECK(p.J == g.J);
        CHECK(p.N == g.N);
        CHECK(p.N0 == g.N0);
    }
    for (const PlanRow& g : golden::kPaperSmc) {
        const Plan p = plan_paper_1d(std::ldexp(1.0, -g.i), Approach::Smc);
        CHECK(p.J == g.J);
        CHECK(p.N0 == g.N0);
        CHECK(p.N == 0);
    }
    CHECK(plan_paper_1d(0.25, Approach::Smc).N0 == 4096);
    CHECK(plan_paper_1d(0.25, Approach::Series).n_exponent == 1.5882);
}

TEST_CASE("planner: published five-dimensional recipe") {
    for (const PlanRow& g : golden::kPaper5dIntegral) {
        const Plan p = plan_paper_5d(std::ldexp(1.0, -g.i), Approach::Integral);
        CHECK(p.J == g.J);
        CHECK(p.N == g.N);
        CHECK(p.N0 == g.N0);
    }
    for (const PlanRow& g : golden::kPaper5dSeries) {
        const Plan p = plan_paper_5d(std::ldexp(1.0, -g.i), Approach::Series);
        CHECK(p.J == g.J);
        CHECK(p.N == g.N);
        CHECK(p.N0 == g.N0);
        CHECK(p.N % 4 == 0);
        CHECK(p.N0 % 4 == 0);
    }
    CHECK(plan_paper_5d(0.25, Approach::Smc).N0 == 4096);
    CHECK_THROWS_AS(plan_paper_5d(0.25, Approach::Mlmc), PlanError);
    CHECK_THROWS_AS(plan_paper_1d(1.5, Approach::Integral), PlanError);
}

TEST_CASE("planner: J = ceil(1/eps)") {
    CHECK(plan_integral(inputs(1, 3, kInfiniteNu, Approach::Integral, 0.125)).J == 8);
    CHECK(plan_series(inputs(1, 3, kInfiniteNu, Approach::Series, 0.0625)).J == 16);
    CHECK(plan_smc(inputs(1, 3, kInfiniteNu, Approach::Smc, 0.3)).J == 4);
}

TEST_CASE("planner: closed-form exponents for finite nu") {
    for (double nu : {50.0, 1e3, 1e6})
        for (int p : {1, 3, 5})
            for (int d : {1, 2, 3}) {
                if (2 * (p + 1) <= d) continue;
                const double P = p + 1.0;
                const double D = d * nu + 2 * P * (d + 2 * nu);
                const Plan in = plan_integral(inputs(d, p, nu, Approach::Integral));
                CHECK(in.n_exponent == doctest::Approx((2 * d * nu + 4 * P * (d + nu)) / D).epsilon(1e-13));
                CHECK(in.complexity_exponent ==
                      doctest::Approx((5 * d * nu + 2 * P * (5 * d + 4 * nu)) / D).epsilon(1e-13));
                const Plan se = plan_series(inputs(d, p, nu, Approach::Series));
                CHECK(se.n_exponent == doctest::Approx((3 * d * nu + 2 * P * (2 * d + 3 * nu)) / D).epsilon(1e-13));
            }
    const Plan one = plan_integral(inputs(1, 3, 1e6, Approach::Integral));
    CHECK(round4(one.n_exponent) == 1.0588);
    CHECK(one.complexity_exponent == complexity_exponent(inputs(1, 3, 1e6, Approach::Integral)));
}

TEST_CASE("planner: limiting exponents reproduce the published recipes") {
    CHECK(round4(plan_integral(inputs(1, 3, kInfiniteNu, Approach::Integral)).n_exponent) == 1.0588);
    CHECK(round4(plan_series(inputs(1, 3, kInfiniteNu, Approach::Series)).n_exponent) == 1.5882);
    CHECK(round4(plan_integral(inputs(5, 3, kInfiniteNu, Approach::Integral)).n_exponent) == 1.2381);
    CHECK(round4(plan_series(inputs(5, 3, kInfiniteNu, Approach::Series)).n_exponent) == 1.8571);

    const Plan i1 = plan_integral(inputs(1, 3, kInfiniteNu, Approach::Integral));
    CHECK(round4(i1.n_constant) == 0.6342);
    CHECK(round4(i1.n0_constant) == 2.5367);
    const Plan s1 = plan_series(inputs(1, 3, kInfiniteNu, Approach::Series));
    CHECK(round4(s1.n_constant) == 0.6342);
    CHECK(round4(s1.n0_constant) == 2.5367);
    const Plan i5 = plan_integral(inputs(5, 3, kInfiniteNu, Approach::Integral));
    CHECK(round4(i5.n_constant) == 35.9733);
    CHECK(round4(i5.n0_constant) == 2014.5030);
    const Plan s5 = plan_series(inputs(5, 3, kInfiniteNu, Approach::Series));
    CHECK(round4(s5.n_constant) == 4.9044);
    CHECK(round4(s5.n0_constant) == 274.6480);
}

TEST_CASE("planner: complexity exponents approach 2 and 2.5") {
    PlanInputs in = inputs(1, 1000000, 1e6, Approach::Integral);
    const double ci = complexity_exponent(in);
    CHECK(ci > 2.0);
    CHECK(ci < 2.01);
    in.approach = Approach::Series;
    const double cs = complexity_exponent(in);
    CHECK(cs > 2.5);
    CHECK(cs < 2.51);
}

TEST_CASE("planner: N0 / N equals the polynomial count") {
    for (double nu : {20.0, 300.0, kInfiniteNu})
        for (int d : {1, 3, 5})
            for (Approach a : {Approach::Integral, Approach::Series}) {
                const Plan p = plan(inputs(d, 3, nu, a));
                CHECK(p.n0_constant / p.n_constant == doctest::Approx(static_cast<double>(basis_count(3, d))).epsilon(1e-12));
            }
    PlanInputs big = inputs(2, 2, kInfiniteNu, Approach::Integral, 1e-4);
    const Plan p = plan_integral(big);
    CHECK(static_cast<double>(p.N0) / static_cast<double>(p.N) == doctest::Approx(basis_count(2, 2)).epsilon(1e-3));
}

TEST_CASE("planner: integral never has the worse complexity") {
    for (int d = 1; d <= 6; ++d)
        for (int p = 0; p <= 6; ++p) {
            const double P = p + 1.0;
            if (2 * P <= d) continue;
            for (double nu : {1.01, 2.0, 5.0, 10.0, 40.0, 1e3, 1e6}) {
                if (nu <= 2 * d * P / (2 * P - d) || nu <= 2 * P / (2 * P - d)) continue;
                const double ci = complexity_exponent(inputs(d, p, nu, Approach::Integral));
                const double cs = complexity_exponent(inputs(d, p, nu, Approach::Series));
                CHECK(ci <= cs + 1e-12);
            }
        }
}

TEST_CASE("planner: infeasible inputs name the violated constraint") {
    try {
        plan_integral(inputs(2, 0, 5.0, Approach::Integral));
        FAIL("expected a plan error");
    } catch (const PlanError& e) {
        CHECK(std::string(e.what()).find("2(p+1) > d") != std::string::npos);
    }
    try {
        plan_integral(inputs(1, 0, 2.0, Approach::Integral));  // bound 2d(p+1)/(2(p+1)-d) = 4
        FAIL("expected a plan error");
    } catch (const PlanError& e) {
        CHECK(std::string(e.what()).find("nu > 2d(p+1)/(2(p+1)-d)") != std::string::npos);
    }
    try {
        plan_series(inputs(3, 1, 3.5, Approach::Series));  // bound 2(p+1)/(2(p+1)-d) = 4
        FAIL("expected a plan error");
    } catch (const PlanError& e) {
        CHECK(std::string(e.what()).find("nu > 2(p+1)/(2(p+1)-d)") != std::string::npos);
    }
    CHECK_NOTHROW(plan_series(inputs(1, 0, 2.5, Approach::Series)));  // bound 2
    CHECK_THROWS_AS(plan_integral(inputs(1, 3, kInfiniteNu, Approach::Integral, 1.0)), PlanError);
    CHECK_THROWS_AS(plan(inputs(1, 3, kInfiniteNu, Approach::Mlmc)), PlanError);
}

TEST_CASE("planner: the log factor and multiplier scale N") {
    PlanInputs in = inputs(1, 3, kInfiniteNu, Approach::Integral, 1.0 / 64);
    in.log_correction = false;
    const Plan plain = plan_integral(in);
    in.multiplier = 256.0;
    const Plan scaled = plan_integral(in);
    CHECK(plain.N == static_cast<std::int64_t>(std::ceil(plain.n_constant * std::pow(64.0, plain.n_exponent))));
    CHECK(scaled.N >= 255 * plain.N);
    in.multiplier = 1.0;
    in.log_correction = true;
    const Plan logged = plan_integral(in);
    const double factor = std::sqrt(logged.n_exponent * std::log(64.0));
    CHECK(logged.N == static_cast<std::int64_t>(std::ceil(plain.n_constant * std::pow(64.0, plain.n_exponent) * factor)));
    CHECK(basis_count(3, 5) == 56);
    CHECK(basis_count(3, 1) == 4);
}
