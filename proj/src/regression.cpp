#include "sdecv/regression.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "sdecv/errors.hpp"

namespace sdecv {

LeastSquaresAccumulator::LeastSquaresAccumulator(const Basis& basis, int outputs)
    : basis_(&basis),
      outputs_(outputs),
      gram_(static_cast<std::size_t>(basis.cell_count())),
      rhs_(static_cast<std::size_t>(basis.cell_count())),
      counts_(static_cast<std::size_t>(basis.cell_count()), 0),
      psi_(basis.local_size()),
      single_(1) {
    if (outputs <= 0) throw PreconditionError("LeastSquaresAccumulator: need at least one output");
}

void LeastSquaresAccumulator::add(const Vector& x, const Vector& targets) {
    if (!x.allFinite() || !targets.allFinite()) throw DataError("regression data contains non-finite values");
    const int cell = basis_->locate(x);
    if (cell < 0) return;
    basis_->evaluate_local(x, cell, psi_);
    auto& gram = gram_[cell];
    auto& rhs = rhs_[cell];
    if (gram.size() == 0) {
        gram = Matrix::Zero(psi_.size(), psi_.size());
        rhs = Matrix::Zero(psi_.size(), outputs_);
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(psi_);
    rhs.noalias() += psi_ * targets.transpose();
    ++counts_[cell];
    ++samples_;
}

void LeastSquaresAccumulator::add(const Vector& x, double target) {
    single_(0) = target;
    add(x, single_);
}

void LeastSquaresAccumulator::merge(const LeastSquaresAccumulator& other) {
    if (other.gram_.size() != gram_.size() || other.outputs_ != outputs_)
        throw ContractViolation("LeastSquaresAccumulator: merging incompatible accumulators");
    for (std::size_t cell = 0; cell < gram_.size(); ++cell) {
        if (other.counts_[cell] == 0) continue;
        if (gram_[cell].size() == 0) {
            gram_[cell] = other.gram_[cell];
            rhs_[cell] = other.rhs_[cell];
        } else {
            gram_[cell] += other.gram_[cell];
            rhs_[cell] += other.rhs_[cell];
        }
        counts_[cell] += other.counts_[cell];
    }
    samples_ += other.samples_;
}

Matrix LeastSquaresAccumulator::solve(FitDiagnostics* diagnostics) const {
    const int q = basis_->local_size();
    const int cells = basis_->cell_count();
    Matrix coefficients = Matrix::Zero(basis_->size(), outputs_);
    FitDiagnostics diag;
    diag.cell_counts = counts_;
    diag.condition.assign(static_cast<std::size_t>(cells), 0.0);
    diag.ridge_applied.assign(static_cast<std::size_t>(cells), false);

    for (int cell = 0; cell < cells; ++cell) {
        if (counts_[cell] == 0) {
            ++diag.empty_cells;
            continue;
        }
        Matrix gram = gram_[cell].selfadjointView<Eigen::Lower>();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues()(0);
        const double hi = eig.eigenvalues()(q - 1);
        const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        diag.condition[cell] = condition;
        if (!(condition <= kRidgeConditionThreshold)) {
            gram.diagonal().array() += kRidgeScale * gram.trace() / q;
            diag.ridge_applied[cell] = true;
        }
        coefficients.middleRows(static_cast<Eigen::Index>(cell) * q, q) =
            gram.colPivHouseholderQr().solve(rhs_[cell]);
    }
    if (diagnostics) *diagnostics = std::move(diag);
    return coefficients;
}

FitResult fit(const Basis& basis, const Matrix& inputs, const Vector& targets) {
    const Eigen::Index n = inputs.rows();
    if (n <= 0) throw PreconditionError("fit: need at least one sample");
    if (targets.size() != n) throw ContractViolation("fit: inputs and targets differ in length");
    if (inputs.cols() != basis.dimension()) throw ContractViolation("fit: inputs have wrong dimension");
    if (basis.spec().kind == BasisKind::GlobalPolyPlusPayoff && n <= basis.size())
        throw PreconditionError("fit: N = " + std::to_string(n) + " must exceed the basis size " +
                                std::to_string(basis.size()));

    LeastSquaresAccumulator acc(basis, 1);
    Vector x(inputs.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        x = inputs.row(i).transpose();
        acc.add(x, targets(i));
    }
    FitResult result;
    result.coefficients = acc.solve(&result.diagnostics).col(0);
    return result;
}

double truncate(double value, double bound) {
    if (!(bound > 0.0)) throw PreconditionError("truncate: bound must be positive");
    if (std::abs(value) <= bound) return value;
    return value > 0.0 ? bound : -bound;
}

CoefficientTable::CoefficientTable(Basis basis, int steps, int outputs, std::optional<double> bound)
    : basis_(std::move(basis)), steps_(steps), outputs_(outputs), bound_(bound) {
    if (steps <= 0 || outputs <= 0) throw PreconditionError("CoefficientTable: J and K must be positive");
    if (bound_ && !(*bound_ > 0.0)) throw PreconditionError("CoefficientTable: truncation bound must be positive");
    values_.assign(static_cast<std::size_t>(steps) * outputs * basis_.size(), 0.0);
}

std::size_t CoefficientTable::offset(int j, int k) const {
    return (static_cast<std::size_t>(j - 1) * outputs_ + k) * basis_.size();
}

Eigen::Map<Vector> CoefficientTable::coefficients(int j, int k) {
    if (j < 1 || j > steps_ || k < 0 || k >= outputs_) throw PreconditionError("CoefficientTable: index out of range");
    return Eigen::Map<Vector>(values_.data() + offset(j, k), basis_.size());
}

Eigen::Map<const Vector> CoefficientTable::coefficients(int j, int k) const {
    if (j < 1 || j > steps_ || k < 0 || k >= outputs_) throw PreconditionError("CoefficientTable: index out of range");
    return Eigen::Map<const Vector>(values_.data() + offset(j, k), basis_.size());
}

double CoefficientTable::predict_unchecked(int j, int k, const Vector& x, Vector& local) const {
    const int cell = basis_.locate(x);
    if (cell < 0) return 0.0;
    basis_.evaluate_local(x, cell, local);
    const double* alpha = values_.data() + offset(j, k) + static_cast<std::size_t>(cell) * basis_.local_size();
    const double raw = Eigen::Map<const Vector>(alpha, basis_.local_size()).dot(local);
    return bound_ ? truncate(raw, *bound_) : raw;
}

void CoefficientTable::predict_all(int j, const Vector& x, Vector& local, Vector& out) const {
    out.resize(outputs_);
    const int cell = basis_.locate(x);
    if (cell < 0) {
        out.setZero();
        return;
    }
    basis_.evaluate_local(x, cell, local);
    const std::size_t within = static_cast<std::size_t>(cell) * basis_.local_size();
    for (int k = 0; k < outputs_; ++k) {
        const double raw =
            Eigen::Map<const Vector>(values_.data() + offset(j, k) + within, basis_.local_size()).dot(local);
        out(k) = bound_ ? truncate(raw, *bound_) : raw;
    }
}

double CoefficientTable::predict(int j, int k, const Vector& x) const {
    if (j < 1 || j > steps_ || k < 0 || k >= outputs_)
        throw PreconditionError("predict: index (" + std::to_string(j) + ", " + std::to_string(k) + ") out of range");
    if (x.size() != basis_.dimension()) throw ContractViolation("predict: point has wrong dimension");
    Vector local;
    return predict_unchecked(j, k, x, local);
}

bool CoefficientTable::operator==(const CoefficientTable& other) const {
    return basis_.spec() == other.basis_.spec() && steps_ == other.steps_ && outputs_ == other.outputs_ &&
           bound_ == other.bound_ && values_ == other.values_;
}

namespace binary {

void put_u32(std::ostream& os, std::uint32_t v) {
    std::array<char, 4> bytes;
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(bytes.data(), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> bytes;
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(bytes.data(), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), 8);
    if (!is) throw DataError("truncated binary input");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

std::uint32_t get_u32(std::istream& is) {
    std::array<unsigned char, 4> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), 4);
    if (!is) throw DataError("truncated binary input");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace binary

namespace {
constexpr char kTableMagic[8] = {'S', 'D', 'C', 'V', 'T', 'A', 'B', '1'};
}

void write_table(std::ostream& os, const CoefficientTable& table) {
    using namespace binary;
    const BasisSpec& spec = table.basis().spec();
    os.write(kTableMagic, 8);
    put_u32(os, spec.kind == BasisKind::GlobalPolyPlusPayoff ? 0u : 1u);
    put_u32(os, static_cast<std::uint32_t>(spec.p));
    put_u32(os, static_cast<std::uint32_t>(spec.d));
    put_u32(os, spec.include_payoff ? 1u : 0u);
    put_u32(os, static_cast<std::uint32_t>(spec.Q));
    put_f64(os, spec.R);
    put_u32(os, static_cast<std::uint32_t>(table.steps()));
    put_u32(os, static_cast<std::uint32_t>(table.outputs()));
    put_u32(os, static_cast<std::uint32_t>(table.basis().size()));
    const char has_bound = table.bound() ? 1 : 0;
    os.write(&has_bound, 1);
    put_f64(os, table.bound().value_or(0.0));
    for (double v : table.raw()) put_f64(os, v);
    if (!os) throw DataError("failed to write coefficient table");
}

CoefficientTable read_table(std::istream& is, std::function<double(const Vector&)> payoff) {
    using namespace binary;
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kTableMagic, 8) != 0) throw DataError("not a coefficient table");
    BasisSpec spec;
    const std::uint32_t kind = get_u32(is);
    if (kind > 1) throw DataError("unknown basis kind in coefficient table");
    spec.kind = kind == 0 ? BasisKind::GlobalPolyPlusPayoff : BasisKind::PiecewisePoly;
    spec.p = static_cast<int>(get_u32(is));
    spec.d = static_cast<int>(get_u32(is));
    spec.include_payoff = get_u32(is) != 0;
    spec.Q = static_cast<int>(get_u32(is));
    spec.R = get_f64(is);
    const int steps = static_cast<int>(get_u32(is));
    const int outputs = static_cast<int>(get_u32(is));
    const std::uint32_t basis_size = get_u32(is);
    char has_bound = 0;
    is.read(&has_bound, 1);
    const double bound = get_f64(is);
    if (!is) throw DataError("truncated coefficient table header");

    CoefficientTable table(Basis(spec, std::move(payoff)), steps, outputs,
                           has_bound ? std::optional<double>(bound) : std::nullopt);
    if (static_cast<std::uint32_t>(table.basis().size()) != basis_size)
        throw DataError("coefficient table basis size does not match its spec");
    for (int j = 1; j <= steps; ++j)
        for (int k = 0; k < outputs; ++k) {
            auto alpha = table.coefficients(j, k);
            for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha(i) = get_f64(is);
        }
    return table;
}

}  // namespace sdecv
