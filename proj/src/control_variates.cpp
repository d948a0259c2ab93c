#include "sdecv/control_variates.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "sdecv/errors.hpp"
#include "sdecv/hermite.hpp"
#include "sdecv/parallel.hpp"

namespace sdecv {

namespace {

Basis make_basis(const BasisSpec& spec, const SdeModel& model) {
    if (spec.d != model.d)
        throw ContractViolation("basis dimension " + std::to_string(spec.d) + " differs from model dimension " +
                                std::to_string(model.d));
    if (spec.kind == BasisKind::GlobalPolyPlusPayoff && spec.include_payoff) return Basis(spec, model.payoff);
    return Basis(spec);
}

void check_training_request(const Basis& basis, std::int64_t paths, const RngStream& streams,
                            const std::optional<double>& truncation) {
    if (paths <= basis.local_size())
        throw PreconditionError("training needs N > basis size: N = " + std::to_string(paths) +
                                ", basis size = " + std::to_string(basis.local_size()));
    if (streams.stream() + static_cast<std::uint64_t>(paths) > kTestingStreamBase)
        throw PreconditionError("training streams must stay below the testing partition (2^32)");
    if (basis.spec().kind == BasisKind::PiecewisePoly && !truncation)
        throw PreconditionError("the piecewise basis requires a truncation bound A");
    if (truncation && !(*truncation > 0.0)) throw PreconditionError("truncation bound must be positive");
}

using StepAccumulators = std::vector<LeastSquaresAccumulator>;

StepAccumulators make_accumulators(const Basis& basis, int steps, int outputs) {
    StepAccumulators acc;
    acc.reserve(static_cast<std::size_t>(steps));
    for (int j = 0; j < steps; ++j) acc.emplace_back(basis, outputs);
    return acc;
}

/// Simulates all training paths block by block and solves one regression per step.
template <class AddPath>
void fit_steps(const SdeModel& model, const TimeGrid& grid, std::int64_t paths, const RngStream& streams,
               bool with_tangents, int outputs, int threads, CoefficientTable& table, AddPath add_path) {
    const Basis& basis = table.basis();
    StepAccumulators total = make_accumulators(basis, grid.steps(), outputs);
    for_each_block_ordered(
        block_count(paths), threads,
        [&](std::int64_t block) {
            StepAccumulators acc = make_accumulators(basis, grid.steps(), outputs);
            StepWorkspace ws(model);
            PathBundle bundle;
            Vector x(model.d), targets(outputs);
            const std::int64_t end = std::min(paths, (block + 1) * kPathBlock);
            for (std::int64_t n = block * kPathBlock; n < end; ++n) {
                RngStream rng = streams.substream(static_cast<std::uint64_t>(n));
                simulate_path(model, grid, rng, with_tangents, ws, bundle);
                add_path(bundle, acc, x, targets);
            }
            return acc;
        },
        [&](StepAccumulators&& acc) {
            for (int j = 0; j < grid.steps(); ++j) total[j].merge(acc[j]);
        });

    for (int j = 1; j <= grid.steps(); ++j) {
        const Matrix alpha = total[j - 1].solve();
        for (int k = 0; k < outputs; ++k) table.coefficients(j, k) = alpha.col(k);
    }
}

}  // namespace

ControlVariateModel train_integral(const SdeModel& model, const TimeGrid& grid, std::int64_t paths,
                                   const BasisSpec& spec, const RngStream& streams,
                                   std::optional<double> truncation, int threads) {
    check_model(model);
    Basis basis = make_basis(spec, model);
    check_training_request(basis, paths, streams, truncation);
    CoefficientTable table(std::move(basis), grid.steps(), model.d, truncation);

    fit_steps(model, grid, paths, streams, true, model.d, threads, table,
              [&](const PathBundle& bundle, StepAccumulators& acc, Vector& x, Vector& targets) {
                  const auto& zeta = *bundle.sensitivities;
                  for (int j = 1; j <= bundle.steps(); ++j) {
                      x = bundle.states.row(j - 1).transpose();
                      targets = zeta[j - 1].transpose();
                      acc[j - 1].add(x, targets);
                  }
              });
    return {Approach::Integral, std::move(table), grid,
            TrainingMetadata{paths, streams.seed(), streams.stream()}};
}

ControlVariateModel train_series(const SdeModel& model, const TimeGrid& grid, std::int64_t paths,
                                 const BasisSpec& spec, const RngStream& streams,
                                 std::optional<double> truncation, int threads) {
    check_model(model);
    Basis basis = make_basis(spec, model);
    check_training_request(basis, paths, streams, truncation);
    std::optional<double> bound;
    if (truncation) bound = *truncation * grid.sqrt_delta();
    CoefficientTable table(std::move(basis), grid.steps(), model.m, bound);

    const double inv_sqrt_delta = 1.0 / grid.sqrt_delta();
    fit_steps(model, grid, paths, streams, false, model.m, threads, table,
              [&](const PathBundle& bundle, StepAccumulators& acc, Vector& x, Vector& targets) {
                  const double fx = model.payoff(bundle.terminal());
                  for (int j = 1; j <= bundle.steps(); ++j) {
                      x = bundle.states.row(j - 1).transpose();
                      targets = (fx * inv_sqrt_delta) * bundle.increments.row(j - 1).transpose();
                      acc[j - 1].add(x, targets);
                  }
              });
    return {Approach::Series, std::move(table), grid,
            TrainingMetadata{paths, streams.seed(), streams.stream()}};
}

ControlVariateModel zero_control_variate(Approach approach, const SdeModel& model, const TimeGrid& grid,
                                         const BasisSpec& spec) {
    if (approach != Approach::Integral && approach != Approach::Series)
        throw PreconditionError("control variates exist for the integral and series approaches only");
    const int outputs = approach == Approach::Integral ? model.d : model.m;
    return {approach, CoefficientTable(make_basis(spec, model), grid.steps(), outputs), grid, {}};
}

ControlVariateEvaluator::ControlVariateEvaluator(const ControlVariateModel& cv, const SdeModel& model)
    : cv_(&cv),
      model_(&model),
      x_(model.d),
      dw_(model.m),
      noise_(model.d),
      sigma_(model.d, model.m) {
    const int expected = cv.approach == Approach::Integral ? model.d : model.m;
    if (cv.table.outputs() != expected)
        throw ContractViolation("control variate table width does not match the model");
    if (cv.table.steps() != cv.grid.steps()) throw ContractViolation("control variate table and grid disagree on J");
}

void ControlVariateEvaluator::partial_sums(const PathBundle& bundle, std::vector<double>& out) {
    const ControlVariateModel& cv = *cv_;
    if (bundle.steps() != cv.grid.steps())
        throw ContractViolation("path has " + std::to_string(bundle.steps()) + " steps, control variate expects " +
                                std::to_string(cv.grid.steps()));
    out.resize(static_cast<std::size_t>(bundle.steps()));
    const double inv_sqrt_delta = 1.0 / cv.grid.sqrt_delta();
    double sum = 0.0;
    for (int j = 1; j <= bundle.steps(); ++j) {
        x_ = bundle.states.row(j - 1).transpose();
        dw_ = bundle.increments.row(j - 1).transpose();
        cv.table.predict_all(j, x_, local_, coeffs_);
        if (cv.approach == Approach::Integral) {
            model_->diffusion(x_, sigma_);
            noise_.noalias() = sigma_ * dw_;
            sum += coeffs_.dot(noise_);
        } else {
            sum += coeffs_.dot(dw_) * inv_sqrt_delta;
        }
        out[j - 1] = sum;
    }
}

double ControlVariateEvaluator::operator()(const PathBundle& bundle) {
    const ControlVariateModel& cv = *cv_;
    if (bundle.steps() != cv.grid.steps())
        throw ContractViolation("path has " + std::to_string(bundle.steps()) + " steps, control variate expects " +
                                std::to_string(cv.grid.steps()));
    const double inv_sqrt_delta = 1.0 / cv.grid.sqrt_delta();
    double sum = 0.0;
    for (int j = 1; j <= bundle.steps(); ++j) {
        x_ = bundle.states.row(j - 1).transpose();
        dw_ = bundle.increments.row(j - 1).transpose();
        cv.table.predict_all(j, x_, local_, coeffs_);
        if (cv.approach == Approach::Integral) {
            model_->diffusion(x_, sigma_);
            noise_.noalias() = sigma_ * dw_;
            sum += coeffs_.dot(noise_);
        } else {
            sum += coeffs_.dot(dw_) * inv_sqrt_delta;
        }
    }
    return sum;
}

double evaluate_cv(const ControlVariateModel& cv, const SdeModel& model, const PathBundle& bundle) {
    ControlVariateEvaluator evaluator(cv, model);
    return evaluator(bundle);
}

namespace {
constexpr char kModelMagic[8] = {'S', 'D', 'C', 'V', 'M', 'O', 'D', '1'};
}

void write_control_variate(std::ostream& os, const ControlVariateModel& cv) {
    using namespace binary;
    os.write(kModelMagic, 8);
    put_u32(os, cv.approach == Approach::Integral ? 0u : 1u);
    put_f64(os, cv.grid.horizon());
    put_u32(os, static_cast<std::uint32_t>(cv.grid.steps()));
    put_u64(os, cv.metadata.seed);
    put_u64(os, cv.metadata.stream);
    put_u64(os, static_cast<std::uint64_t>(cv.metadata.paths));
    write_table(os, cv.table);
}

ControlVariateModel read_control_variate(std::istream& is, const SdeModel& model) {
    using namespace binary;
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != std::string(kModelMagic, 8)) throw DataError("not a control variate file");
    const std::uint32_t approach = get_u32(is);
    if (approach > 1) throw DataError("unknown approach in control variate file");
    const double horizon = get_f64(is);
    const int steps = static_cast<int>(get_u32(is));
    TrainingMetadata meta;
    meta.seed = get_u64(is);
    meta.stream = get_u64(is);
    meta.paths = static_cast<std::int64_t>(get_u64(is));
    CoefficientTable table = read_table(is, model.payoff);
    if (table.steps() != steps) throw DataError("control variate header and table disagree on J");
    return {approach == 0 ? Approach::Integral : Approach::Series, std::move(table), TimeGrid(steps, horizon), meta};
}

ChaosReport chaos_validate(const SdeModel& model, const TimeGrid& grid, int max_order, std::int64_t paths,
                           const BasisSpec& spec, std::uint64_t seed, std::int64_t testing_paths) {
    if (model.d != 1 || model.m != 1) throw UnsupportedOperation("chaos_validate supports d = m = 1 only");
    if (grid.steps() > 4) throw PreconditionError("chaos_validate is limited to J <= 4");
    if (max_order < 0 || max_order > 2) throw PreconditionError("chaos_validate: max_order must be 0, 1 or 2");
    check_model(model);
    if (testing_paths <= 0) testing_paths = paths;

    const Basis basis = make_basis(spec, model);
    const int steps = grid.steps();
    const double inv_sqrt_delta = 1.0 / grid.sqrt_delta();
    ChaosReport report;
    report.training_paths = paths;
    report.testing_paths = testing_paths;

    // one table per chaos order k = 1..max_order
    std::vector<CoefficientTable> tables;
    if (max_order > 0) {
        if (paths <= basis.local_size()) throw PreconditionError("chaos_validate needs N > basis size");
        std::vector<StepAccumulators> acc;
        for (int k = 0; k < max_order; ++k) acc.push_back(make_accumulators(basis, steps, 1));
        StepWorkspace ws(model);
        PathBundle bundle;
        const RngStream streams = training_streams(seed);
        Vector x(1);
        for (std::int64_t n = 0; n < paths; ++n) {
            RngStream rng = streams.substream(static_cast<std::uint64_t>(n));
            simulate_path(model, grid, rng, false, ws, bundle);
            const double fx = model.payoff(bundle.terminal());
            for (int j = 1; j <= steps; ++j) {
                x(0) = bundle.states(j - 1, 0);
                const double z = bundle.increments(j - 1, 0) * inv_sqrt_delta;
                for (int k = 1; k <= max_order; ++k) acc[k - 1][j - 1].add(x, fx * hermite(k, z));
            }
        }
        for (int k = 1; k <= max_order; ++k) {
            CoefficientTable table(basis, steps, 1);
            for (int j = 1; j <= steps; ++j) table.coefficients(j, 0) = acc[k - 1][j - 1].solve().col(0);
            tables.push_back(std::move(table));
        }
    }

    // residual moments for each truncation order on common testing paths
    const int orders = max_order + 1;
    StepWorkspace ws(model);
    PathBundle bundle;
    Vector x(1), local;
    const RngStream streams = testing_streams(seed);
    std::vector<std::vector<double>> values(orders);
    for (auto& v : values) v.reserve(static_cast<std::size_t>(testing_paths));
    for (std::int64_t n = 0; n < testing_paths; ++n) {
        RngStream rng = streams.substream(static_cast<std::uint64_t>(n));
        simulate_path(model, grid, rng, false, ws, bundle);
        double r = model.payoff(bundle.terminal());
        values[0].push_back(r);
        for (int k = 1; k <= max_order; ++k) {
            for (int j = 1; j <= steps; ++j) {
                x(0) = bundle.states(j - 1, 0);
                const double z = bundle.increments(j - 1, 0) * inv_sqrt_delta;
                r -= tables[k - 1].predict_unchecked(j, 0, x, local) * hermite(k, z);
            }
            values[k].push_back(r);
        }
    }
    for (int k = 0; k < orders; ++k) {
        const auto& v = values[k];
        double mean = 0.0;
        for (double y : v) mean += y;
        mean /= static_cast<double>(v.size());
        double m2 = 0.0, m4 = 0.0;
        for (double y : v) {
            const double c = (y - mean) * (y - mean);
            m2 += c;
            m4 += c * c;
        }
        const double n = static_cast<double>(v.size());
        const double var = m2 / (n - 1.0);
        m4 /= n;
        report.variance.push_back(var);
        report.variance_stderr.push_back(std::sqrt(std::max(0.0, m4 - var * var) / n));
    }
    return report;
}

}  // namespace sdecv
