#include "sdecv/estimators.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

#include "sdecv/errors.hpp"
#include "sdecv/parallel.hpp"

namespace sdecv {

void RunningStats::add(double value) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double n_a = static_cast<double>(count), n_b = static_cast<double>(other.count);
    const double total = n_a + n_b;
    const double delta = other.mean - mean;
    mean += delta * n_b / total;
    m2 += other.m2 + delta * delta * n_a * n_b / total;
    count += other.count;
}

double RunningStats::variance() const { return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1); }

double EstimatorReport::standard_error() const {
    if (n_paths <= 0) return 0.0;
    return std::sqrt(sample_variance / static_cast<double>(n_paths));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Mean and variance of value(bundle) over `paths` Euler paths.
template <class MakeValue>
RunningStats path_statistics(const SdeModel& model, const TimeGrid& grid, std::int64_t paths,
                             const RngStream& streams, int threads, MakeValue make_value) {
    RunningStats total;
    for_each_block_ordered(
        block_count(paths), threads,
        [&](std::int64_t block) {
            auto value = make_value();
            RunningStats stats;
            StepWorkspace ws(model);
            PathBundle bundle;
            const std::int64_t end = std::min(paths, (block + 1) * kPathBlock);
            for (std::int64_t n = block * kPathBlock; n < end; ++n) {
                RngStream rng = streams.substream(static_cast<std::uint64_t>(n));
                simulate_path(model, grid, rng, false, ws, bundle);
                stats.add(value(bundle));
            }
            return stats;
        },
        [&](RunningStats&& stats) { total.merge(stats); });
    return total;
}

}  // namespace

EstimatorReport smc_estimate(const SdeModel& model, const TimeGrid& grid, std::int64_t paths,
                             const RngStream& streams, int threads) {
    if (paths < 2) throw PreconditionError("smc_estimate: need N0 >= 2");
    check_model(model);
    const auto start = Clock::now();
    const RunningStats stats = path_statistics(model, grid, paths, streams, threads, [&] {
        return [&](const PathBundle& bundle) { return model.payoff(bundle.terminal()); };
    });
    EstimatorReport report;
    report.approach = Approach::Smc;
    report.estimate = stats.mean;
    report.sample_variance = stats.variance();
    report.n_paths = stats.count;
    report.wall_time = seconds_since(start);
    report.J = grid.steps();
    report.N0 = paths;
    report.seed = streams.seed();
    return report;
}

EstimatorReport cv_estimate(const SdeModel& model, const TimeGrid& grid, const ControlVariateModel& cv,
                            std::int64_t paths, const RngStream& streams, int threads) {
    if (paths < 2) throw PreconditionError("cv_estimate: need N0 >= 2");
    if (!(cv.grid == grid)) throw ContractViolation("cv_estimate: control variate was trained on a different grid");
    if (streams.stream() < kTestingStreamBase)
        throw PreconditionError("cv_estimate: testing streams must have ids >= 2^32");
    check_model(model);
    const auto start = Clock::now();
    const RunningStats stats = path_statistics(model, grid, paths, streams, threads, [&] {
        return [&, evaluator = ControlVariateEvaluator(cv, model)](const PathBundle& bundle) mutable {
            return model.payoff(bundle.terminal()) - evaluator(bundle);
        };
    });
    EstimatorReport report;
    report.approach = cv.approach;
    report.estimate = stats.mean;
    report.sample_variance = stats.variance();
    report.n_paths = stats.count;
    report.wall_time = seconds_since(start);
    report.J = grid.steps();
    report.N = cv.metadata.paths;
    report.N0 = paths;
    report.p = cv.table.basis().spec().p;
    report.seed = streams.seed();
    return report;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc()) return "nan";
    return std::string(buffer, ptr);
}

namespace {

std::string optional_field(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : ""; }
std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

void write_study_rows(std::ostream& os, const StudyTable& table) {
    for (const StudyRow& row : table.rows) {
        os << to_string(row.approach) << ',' << format_number(row.epsilon) << ',' << row.J << ',' << row.N << ','
           << row.N0 << ',' << optional_field(row.Q) << ',' << optional_field(row.R) << ',' << row.p << ','
           << format_number(row.estimate_mean) << ',' << format_number(row.rmse) << ','
           << format_number(row.var_mean) << ',' << format_number(row.time_seconds_mean) << ','
           << row.repetitions << '\n';
    }
}

void write_study_footer(std::ostream& os, Approach approach, const StudyTable& table) {
    os << "#slope," << to_string(approach) << ','
       << (table.slope ? format_number(*table.slope) : std::string("nan")) << '\n';
}

void write_run_row(std::ostream& os, const EstimatorReport& r) {
    os << to_string(r.approach) << ',' << (r.epsilon ? format_number(*r.epsilon) : std::string()) << ',' << r.J
       << ',' << r.N << ',' << r.N0 << ',' << optional_field(r.Q) << ',' << optional_field(r.R) << ',' << r.p
       << ',' << format_number(r.estimate) << ',' << format_number(r.sample_variance) << ','
       << format_number(r.standard_error()) << ',' << r.n_paths << ',' << format_number(r.wall_time) << ','
       << r.seed << '\n';
}

}  // namespace sdecv
