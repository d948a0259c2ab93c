#include <chrono>
#include <cmath>

#include "sdecv/errors.hpp"
#include "sdecv/estimators.hpp"
#include "sdecv/parallel.hpp"

namespace sdecv {

namespace {
constexpr std::uint64_t kLevelStreamStride = std::uint64_t{1} << 40;
}

MlmcLevelSampler::MlmcLevelSampler(const SdeModel& model, int refinement, RngStream streams)
    : model_(&model), refinement_(refinement), streams_(streams) {
    if (refinement < 2) throw PreconditionError("MLMC refinement factor M must be at least 2");
    check_model(model);
}

std::int64_t MlmcLevelSampler::steps(int level) const {
    std::int64_t s = 1;
    for (int l = 0; l < level; ++l) s *= refinement_;
    return s;
}

double MlmcLevelSampler::cost(int level) const {
    const double fine = static_cast<double>(steps(level));
    return level == 0 ? fine : fine + fine / refinement_;
}

RunningStats MlmcLevelSampler::sample(int level, std::int64_t first, std::int64_t count, RunningStats* fine,
                                      RunningStats* coarse, int threads) const {
    const SdeModel& model = *model_;
    const std::int64_t fine_steps = steps(level);
    const double h = model.horizon / static_cast<double>(fine_steps);
    const double sqrt_h = std::sqrt(h);
    const double h_coarse = h * refinement_;
    const RngStream base = streams_.substream(static_cast<std::uint64_t>(level) * kLevelStreamStride);

    struct Triple {
        RunningStats diff, fine, coarse;
    };
    Triple total;
    // blocks are aligned to absolute path indices so that results do not
    // depend on how the paths of a level were split into batches
    const std::int64_t first_block = first / kPathBlock;
    const std::int64_t last_block = (first + count + kPathBlock - 1) / kPathBlock;
    for_each_block_ordered(
        last_block - first_block, threads,
        [&](std::int64_t b) {
            Triple out;
            StepWorkspace ws(model);
            Vector xf(model.d), xc(model.d), next(model.d), dw(model.m), dwc(model.m);
            const std::int64_t begin = std::max(first, (first_block + b) * kPathBlock);
            const std::int64_t end = std::min(first + count, (first_block + b + 1) * kPathBlock);
            for (std::int64_t n = begin; n < end; ++n) {
                RngStream rng = base.substream(static_cast<std::uint64_t>(n));
                xf = model.x0;
                xc = model.x0;
                dwc.setZero();
                for (std::int64_t s = 1; s <= fine_steps; ++s) {
                    for (int i = 0; i < model.m; ++i) dw(i) = sqrt_h * rng.gaussian();
                    euler_step(model, xf, h, dw, ws, next);
                    xf.swap(next);
                    if (level > 0) {
                        dwc += dw;
                        if (s % refinement_ == 0) {
                            euler_step(model, xc, h_coarse, dwc, ws, next);
                            xc.swap(next);
                            dwc.setZero();
                        }
                    }
                }
                const double pf = model.payoff(xf);
                const double pc = level > 0 ? model.payoff(xc) : 0.0;
                out.diff.add(pf - pc);
                out.fine.add(pf);
                if (level > 0) out.coarse.add(pc);
            }
            return out;
        },
        [&](Triple&& t) {
            total.diff.merge(t.diff);
            total.fine.merge(t.fine);
            total.coarse.merge(t.coarse);
        });
    if (fine) *fine = total.fine;
    if (coarse) *coarse = total.coarse;
    return total.diff;
}

namespace {

EstimatorReport assemble_report(const std::vector<RunningStats>& stats, const MlmcLevelSampler& sampler,
                                const RngStream& streams) {
    EstimatorReport report;
    report.approach = Approach::Mlmc;
    double estimator_variance = 0.0;
    for (std::size_t l = 0; l < stats.size(); ++l) {
        const RunningStats& s = stats[l];
        report.estimate += s.mean;
        report.n_paths += s.count;
        if (s.count > 0) estimator_variance += s.variance() / static_cast<double>(s.count);
        report.levels.push_back(LevelSummary{static_cast<int>(l), sampler.steps(static_cast<int>(l)), s.count,
                                             s.mean, s.variance()});
    }
    report.sample_variance = estimator_variance * static_cast<double>(report.n_paths);
    report.J = sampler.steps(static_cast<int>(stats.size()) - 1);
    report.seed = streams.seed();
    return report;
}

}  // namespace

EstimatorReport mlmc_fixed(const SdeModel& model, int refinement, const std::vector<std::int64_t>& paths_per_level,
                           const RngStream& streams, int threads) {
    if (paths_per_level.empty()) throw PreconditionError("mlmc_fixed: need at least one level");
    const auto start = std::chrono::steady_clock::now();
    MlmcLevelSampler sampler(model, refinement, streams);
    std::vector<RunningStats> stats;
    for (std::size_t l = 0; l < paths_per_level.size(); ++l) {
        if (paths_per_level[l] < 2) throw PreconditionError("mlmc_fixed: need at least two paths per level");
        stats.push_back(sampler.sample(static_cast<int>(l), 0, paths_per_level[l], nullptr, nullptr, threads));
    }
    EstimatorReport report = assemble_report(stats, sampler, streams);
    report.N0 = paths_per_level.front();
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

EstimatorReport mlmc_estimate(const SdeModel& model, const MlmcOptions& options, const RngStream& streams,
                              int threads) {
    if (options.refinement < 2) throw PreconditionError("mlmc_estimate: M must be at least 2");
    if (!(options.epsilon > 0.0)) throw PreconditionError("mlmc_estimate: epsilon must be positive");
    if (options.initial_paths < 2) throw PreconditionError("mlmc_estimate: need at least two initial paths");
    const auto start = std::chrono::steady_clock::now();
    MlmcLevelSampler sampler(model, options.refinement, streams);
    const double eps2 = options.epsilon * options.epsilon;
    const double M = options.refinement;

    std::vector<RunningStats> stats;
    std::vector<std::int64_t> extra;
    int L = 0;
    while (true) {
        stats.emplace_back();
        extra.push_back(options.initial_paths);

        bool pending = true;
        while (pending) {
            for (int l = 0; l <= L; ++l) {
                if (extra[l] <= 0) continue;
                RunningStats more = sampler.sample(l, stats[l].count, extra[l], nullptr, nullptr, threads);
                stats[l].merge(more);
                extra[l] = 0;
            }
            double weighted = 0.0;
            for (int l = 0; l <= L; ++l) weighted += std::sqrt(stats[l].variance() * sampler.cost(l));
            pending = false;
            for (int l = 0; l <= L; ++l) {
                const double optimal =
                    std::ceil(2.0 / eps2 * std::sqrt(stats[l].variance() / sampler.cost(l)) * weighted);
                const std::int64_t target = static_cast<std::int64_t>(optimal);
                if (target > stats[l].count) {
                    extra[l] = target - stats[l].count;
                    pending = true;
                }
            }
        }

        if (L >= options.min_level) {
            const double tail = std::max(std::abs(stats[L - 1].mean) / M, std::abs(stats[L].mean));
            if (tail < (M - 1.0) * options.epsilon / std::sqrt(2.0)) break;
        }
        if (L >= options.max_level) break;
        ++L;
    }

    EstimatorReport report = assemble_report(stats, sampler, streams);
    report.epsilon = options.epsilon;
    report.N0 = options.initial_paths;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace sdecv
