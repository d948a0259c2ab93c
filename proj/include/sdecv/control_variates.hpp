#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sdecv/approach.hpp"
#include "sdecv/regression.hpp"
#include "sdecv/sde_model.hpp"

namespace sdecv {

struct TrainingMetadata {
    std::int64_t paths = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  // first training stream id
};

/// Trained control variate. Integral approach: table holds g~_{j,k},
/// k < d. Series approach: table holds a~_{j,e_i}, i < m.
struct ControlVariateModel {
    Approach approach;
    CoefficientTable table;
    TimeGrid grid;
    TrainingMetadata metadata;
};

/// Regresses zeta_j = grad f(X_T) A_J ... A_{j+1} on the basis at X_{j-1}
/// over N training paths drawn from streams (seed, stream + n).
/// `truncation` is the bound A; it is required for the piecewise basis.
ControlVariateModel train_integral(const SdeModel& model, const TimeGrid& grid, std::int64_t paths,
                                   const BasisSpec& spec, const RngStream& streams,
                                   std::optional<double> truncation = std::nullopt, int threads = 0);

/// Regresses f(X_T) Delta_j W / sqrt(Delta) on the basis at X_{j-1}; no
/// tangent processes are simulated. The stored truncation bound is A sqrt(Delta).
ControlVariateModel train_series(const SdeModel& model, const TimeGrid& grid, std::int64_t paths,
                                 const BasisSpec& spec, const RngStream& streams,
                                 std::optional<double> truncation = std::nullopt, int threads = 0);

/// A control variate with all coefficients zero.
ControlVariateModel zero_control_variate(Approach approach, const SdeModel& model, const TimeGrid& grid,
                                         const BasisSpec& spec);

/// Reusable evaluator; holds scratch buffers, one per thread.
class ControlVariateEvaluator {
  public:
    ControlVariateEvaluator(const ControlVariateModel& cv, const SdeModel& model);
    /// Integral: sum_j sum_k g~_{j,k}(X_{j-1}) (sigma(X_{j-1}) Delta_j W)_k.
    /// Series:   sum_j sum_i a~_{j,i}(X_{j-1}) Delta_j W^i / sqrt(Delta).
    double operator()(const PathBundle& bundle);
    /// Partial sums after each step; element j-1 holds the sum over steps 1..j.
    void partial_sums(const PathBundle& bundle, std::vector<double>& out);

  private:
    const ControlVariateModel* cv_;
    const SdeModel* model_;
    Vector x_;
    Vector local_;
    Vector coeffs_;
    Vector dw_;
    Vector noise_;
    Matrix sigma_;
};

/// The bundle must come from the cv grid and be independent of the training paths.
double evaluate_cv(const ControlVariateModel& cv, const SdeModel& model, const PathBundle& bundle);

void write_control_variate(std::ostream& os, const ControlVariateModel& cv);
ControlVariateModel read_control_variate(std::istream& is, const SdeModel& model);

/// Variances of f(X_T) minus truncated chaos expansions of order 0..max_order.
struct ChaosReport {
    std::vector<double> variance;
    std::vector<double> variance_stderr;
    std::int64_t training_paths = 0;
    std::int64_t testing_paths = 0;
};

/// Validation utility for d = m = 1 and J <= 4: fits a_{j,k}, k = 1..max_order
/// (max_order <= 2) by regressing f(X_T) H_k(Delta_j W / sqrt(Delta)) and
/// reports the residual variances on independent testing paths.
ChaosReport chaos_validate(const SdeModel& model, const TimeGrid& grid, int max_order, std::int64_t paths,
                           const BasisSpec& spec, std::uint64_t seed, std::int64_t testing_paths = 0);

}  // namespace sdecv
