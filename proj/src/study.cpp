#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>

#include "sdecv/errors.hpp"
#include "sdecv/estimators.hpp"

namespace sdecv {

EstimatorReport run_pipeline(const SdeModel& model, const PipelineConfig& config, std::uint64_t seed, int threads) {
    const auto start = std::chrono::steady_clock::now();
    EstimatorReport report;
    const Plan& plan = config.plan;
    if (config.approach == Approach::Mlmc) {
        MlmcOptions options = config.mlmc;
        options.epsilon = plan.epsilon;
        report = mlmc_estimate(model, options, testing_streams(seed), threads);
    } else {
        const TimeGrid grid(static_cast<int>(plan.J), model.horizon);
        if (config.approach == Approach::Smc) {
            report = smc_estimate(model, grid, plan.N0, testing_streams(seed), threads);
        } else {
            const ControlVariateModel cv =
                config.approach == Approach::Integral
                    ? train_integral(model, grid, plan.N, config.basis, training_streams(seed), config.truncation,
                                     threads)
                    : train_series(model, grid, plan.N, config.basis, training_streams(seed), config.truncation,
                                   threads);
            report = cv_estimate(model, grid, cv, plan.N0, testing_streams(seed), threads);
        }
        report.Q = plan.Q;
        report.R = plan.R;
        report.N = plan.N;
        report.p = config.approach == Approach::Smc ? 0 : config.basis.p;
    }
    report.epsilon = plan.epsilon;
    report.seed = seed;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double rmse(const std::vector<double>& estimates, double reference) {
    if (estimates.empty()) throw PreconditionError("rmse: no estimates");
    double sum = 0.0;
    for (double e : estimates) sum += (e - reference) * (e - reference);
    return std::sqrt(sum / static_cast<double>(estimates.size()));
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fitted_slope: need two or more points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw PreconditionError("fitted_slope: x values are all equal");
    return sxy / sxx;
}

StudyTable rmse_study(const SdeModel& model, Approach approach, const StudyOptions& options, const PlanHook& planner) {
    if (options.repetitions < 2) throw PreconditionError("rmse_study: need at least two repetitions");
    if (!std::isfinite(options.reference)) throw PreconditionError("rmse_study: reference must be finite");
    if (options.epsilons.empty()) throw PreconditionError("rmse_study: epsilon list is empty");

    std::vector<double> epsilons = options.epsilons;
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());

    StudyTable table;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        const double eps = epsilons[e];
        PipelineConfig config = planner(eps);
        config.approach = approach;
        // seeds depend on the epsilon value, not on its position in the list
        const std::uint64_t eps_seed = derive_seed(options.master_seed, std::bit_cast<std::uint64_t>(eps));

        std::vector<double> estimates;
        double time_sum = 0.0, var_sum = 0.0;
        std::int64_t finest_J = 0;
        for (int rep = 0; rep < options.repetitions; ++rep) {
            const EstimatorReport report =
                run_pipeline(model, config, derive_seed(eps_seed, static_cast<std::uint64_t>(rep)), options.threads);
            estimates.push_back(report.estimate);
            time_sum += report.wall_time;
            var_sum += report.sample_variance;
            finest_J = std::max(finest_J, report.J);
        }

        StudyRow row;
        row.approach = approach;
        row.epsilon = eps;
        row.J = approach == Approach::Mlmc ? finest_J : config.plan.J;
        row.N = approach == Approach::Mlmc ? 0 : config.plan.N;
        row.N0 = approach == Approach::Mlmc ? config.mlmc.initial_paths : config.plan.N0;
        if (approach == Approach::Integral || approach == Approach::Series) {
            row.Q = config.plan.Q;
            row.R = config.plan.R;
            row.p = config.basis.p;
        }
        row.estimate_mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / estimates.size();
        row.rmse = rmse(estimates, options.reference);
        row.var_mean = var_sum / options.repetitions;
        row.time_seconds_mean = time_sum / options.repetitions;
        row.repetitions = options.repetitions;
        table.rows.push_back(row);
    }

    std::vector<double> log_rmse, log_time;
    for (const StudyRow& row : table.rows) {
        if (row.rmse > 0.0 && row.time_seconds_mean > 0.0) {
            log_rmse.push_back(std::log(row.rmse));
            log_time.push_back(std::log(row.time_seconds_mean));
        }
    }
    if (log_rmse.size() >= 2) {
        try {
            table.slope = fitted_slope(log_rmse, log_time);
        } catch (const PreconditionError&) {
            table.slope.reset();
        }
    }
    return table;
}

}  // namespace sdecv
