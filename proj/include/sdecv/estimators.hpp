#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdecv/approach.hpp"
#include "sdecv/control_variates.hpp"
#include "sdecv/planner.hpp"
#include "sdecv/sde_model.hpp"

namespace sdecv {

/// Welford accumulator with Chan's pairwise merge.
struct RunningStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double value);
    void merge(const RunningStats& other);
    /// Unbiased sample variance (0 for fewer than two samples).
    double variance() const;
};

struct LevelSummary {
    int level = 0;
    std::int64_t steps = 0;  // fine steps on this level
    std::int64_t paths = 0;
    double mean = 0.0;       // mean of P_l - P_{l-1} (P_0 on level 0)
    double variance = 0.0;
};

struct EstimatorReport {
    Approach approach = Approach::Smc;
    double estimate = 0.0;
    /// Per-path variance; sample_variance / n_paths is the squared standard
    /// error. For MLMC it is n_paths * sum_l V_l / N_l.
    double sample_variance = 0.0;
    std::int64_t n_paths = 0;
    double wall_time = 0.0;

    // configuration echo
    std::optional<double> epsilon;
    std::int64_t J = 0;
    std::int64_t N = 0;
    std::int64_t N0 = 0;
    std::optional<std::int64_t> Q;
    std::optional<double> R;
    int p = 0;
    std::uint64_t seed = 0;
    std::vector<LevelSummary> levels;

    double standard_error() const;
};

/// Plain Monte Carlo over N0 Euler paths drawn from streams (seed, stream + n).
EstimatorReport smc_estimate(const SdeModel& model, const TimeGrid& grid, std::int64_t paths,
                             const RngStream& streams, int threads = 0);

/// Mean of f(X_T) - CV over N0 fresh paths. The streams must lie in the testing
/// partition (stream id >= 2^32) so they never overlap the training paths.
EstimatorReport cv_estimate(const SdeModel& model, const TimeGrid& grid, const ControlVariateModel& cv,
                            std::int64_t paths, const RngStream& streams, int threads = 0);

struct MlmcOptions {
    double epsilon = 0.1;
    int refinement = 4;  // M: level l uses M^l steps
    std::int64_t initial_paths = 1000;
    int min_level = 2;   // convergence is tested once L >= min_level
    int max_level = 10;
};

/// Coupled sampler of P_l - P_{l-1}: the coarse path is driven by the sums of
/// M consecutive fine increments. Level l, path n uses stream
/// (seed, stream + l * 2^40 + n); level 0 coincides with plain Monte Carlo on
/// a one-step grid.
class MlmcLevelSampler {
  public:
    MlmcLevelSampler(const SdeModel& model, int refinement, RngStream streams);

    /// Draws paths [first, first + count) of `level`.
    /// Returns stats of P_l - P_{l-1}; optionally the stats of P_l and P_{l-1}.
    RunningStats sample(int level, std::int64_t first, std::int64_t count, RunningStats* fine = nullptr,
                        RunningStats* coarse = nullptr, int threads = 0) const;

    std::int64_t steps(int level) const;
    /// Cost in fine+coarse Euler steps per sample.
    double cost(int level) const;

  private:
    const SdeModel* model_;
    int refinement_;
    RngStream streams_;
};

/// Adaptive multilevel estimator targeting MSE epsilon^2 (Giles' 2008
/// algorithm: variance-optimal N_l, new levels until
/// max(|Y_{L-1}| / M, |Y_L|) < (M - 1) epsilon / sqrt(2)).
EstimatorReport mlmc_estimate(const SdeModel& model, const MlmcOptions& options, const RngStream& streams,
                              int threads = 0);

/// Multilevel estimator with fixed levels 0..L and given paths per level.
EstimatorReport mlmc_fixed(const SdeModel& model, int refinement, const std::vector<std::int64_t>& paths_per_level,
                           const RngStream& streams, int threads = 0);

// ---------------------------------------------------------------------------
// Repeated-run studies

struct PipelineConfig {
    Approach approach = Approach::Smc;
    Plan plan;
    BasisSpec basis;
    std::optional<double> truncation;
    MlmcOptions mlmc;
};

/// Trains (when needed) and estimates once; wall time covers the whole run.
/// Training uses streams (seed, 0..), testing (seed, 2^32..).
EstimatorReport run_pipeline(const SdeModel& model, const PipelineConfig& config, std::uint64_t seed,
                             int threads = 0);

struct StudyRow {
    Approach approach = Approach::Smc;
    double epsilon = 0.0;
    std::int64_t J = 0;
    std::int64_t N = 0;
    std::int64_t N0 = 0;
    std::optional<std::int64_t> Q;
    std::optional<double> R;
    int p = 0;
    double estimate_mean = 0.0;
    double rmse = 0.0;
    double var_mean = 0.0;
    double time_seconds_mean = 0.0;
    int repetitions = 0;
};

struct StudyTable {
    std::vector<StudyRow> rows;  // epsilon descending
    /// Least-squares slope of log(time) against log(RMSE); empty when undefined.
    std::optional<double> slope;
};

/// Maps epsilon to the pipeline configuration of one repetition.
using PlanHook = std::function<PipelineConfig(double epsilon)>;

struct StudyOptions {
    std::vector<double> epsilons;
    int repetitions = 2;
    double reference = 0.0;
    std::uint64_t master_seed = 1;
    int threads = 0;
};

/// Runs every epsilon `repetitions` times with independent seeds derived from
/// (master seed, epsilon index, repetition) and reports RMSE against `reference`.
StudyTable rmse_study(const SdeModel& model, Approach approach, const StudyOptions& options,
                      const PlanHook& planner);

/// Root mean square of (estimate - reference).
double rmse(const std::vector<double>& estimates, double reference);
/// Least-squares slope of y on x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

inline constexpr const char* kStudyCsvHeader =
    "approach,epsilon,J,N,N0,Q,R,p,estimate_mean,rmse,var_mean,time_seconds_mean,repetitions";
inline constexpr const char* kRunCsvHeader =
    "approach,epsilon,J,N,N0,Q,R,p,estimate,sample_variance,stderr,n_paths,time_seconds,seed";

/// Shortest round-trip decimal form.
std::string format_number(double value);

void write_study_rows(std::ostream& os, const StudyTable& table);
/// "#slope,<approach>,<value>" (or "nan" when undefined).
void write_study_footer(std::ostream& os, Approach approach, const StudyTable& table);
void write_run_row(std::ostream& os, const EstimatorReport& report);

}  // namespace sdecv
