#include "sdecv/basis.hpp"

#include <cmath>
#include <string>

#include "sdecv/errors.hpp"

namespace sdecv {

BasisSpec global_basis(int p, int d, bool include_payoff) {
    BasisSpec spec;
    spec.kind = BasisKind::GlobalPolyPlusPayoff;
    spec.p = p;
    spec.d = d;
    spec.include_payoff = include_payoff;
    return spec;
}

BasisSpec piecewise_basis(int p, int d, double R, int Q) {
    BasisSpec spec;
    spec.kind = BasisKind::PiecewisePoly;
    spec.p = p;
    spec.d = d;
    spec.R = R;
    spec.Q = Q;
    spec.include_payoff = false;
    return spec;
}

namespace {

void append_degree(int remaining, int position, std::vector<int>& current,
                   std::vector<std::vector<int>>& out) {
    const int d = static_cast<int>(current.size());
    if (position == d - 1) {
        current[position] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[position] = e;
        append_degree(remaining - e, position + 1, current, out);
    }
    current[position] = 0;
}

}  // namespace

std::vector<std::vector<int>> graded_lex_exponents(int p, int d) {
    std::vector<std::vector<int>> out;
    std::vector<int> current(static_cast<std::size_t>(d), 0);
    for (int degree = 0; degree <= p; ++degree) append_degree(degree, 0, current, out);
    return out;
}

Basis::Basis(BasisSpec spec, std::function<double(const Vector&)> payoff)
    : spec_(spec), payoff_(std::move(payoff)) {
    if (spec_.d <= 0) throw PreconditionError("Basis: dimension must be positive");
    if (spec_.p < 0) throw PreconditionError("Basis: degree must be nonnegative");
    exponents_ = graded_lex_exponents(spec_.p, spec_.d);
    local_size_ = static_cast<int>(exponents_.size());
    if (spec_.kind == BasisKind::GlobalPolyPlusPayoff) {
        if (spec_.include_payoff) {
            if (!payoff_) throw PreconditionError("Basis: payoff requested but no payoff function given");
            ++local_size_;
        }
    } else {
        if (spec_.include_payoff) throw PreconditionError("Basis: the piecewise basis cannot include the payoff");
        if (!(spec_.R > 0.0) || !std::isfinite(spec_.R)) throw PreconditionError("Basis: R must be positive");
        if (spec_.Q <= 0) throw PreconditionError("Basis: Q must be positive");
        const double total = std::pow(static_cast<double>(spec_.Q), spec_.d);
        if (total * local_size_ > 5.0e7) throw PreconditionError("Basis: piecewise basis too large");
        cells_ = static_cast<int>(total);
        cell_width_ = 2.0 * spec_.R / spec_.Q;
    }
}

int Basis::locate(const Vector& x) const {
    if (spec_.kind == BasisKind::GlobalPolyPlusPayoff) return 0;
    int cell = 0;
    int stride = 1;
    for (int k = 0; k < spec_.d; ++k) {
        const double xk = x(k);
        if (!(std::abs(xk) <= spec_.R)) return -1;
        int index = static_cast<int>(std::floor((xk + spec_.R) / cell_width_));
        if (index >= spec_.Q) index = spec_.Q - 1;
        if (index < 0) index = 0;
        cell += index * stride;
        stride *= spec_.Q;
    }
    return cell;
}

void Basis::evaluate_local(const Vector& x, int cell, Vector& out) const {
    out.resize(local_size_);
    const int d = spec_.d;
    const int p = spec_.p;
    // powers[k * (p + 1) + e] = z_k^e for the (local) variable z
    const std::size_t needed = static_cast<std::size_t>(d) * (p + 1);
    double stack_buffer[128];
    std::vector<double> heap_buffer;
    double* powers = stack_buffer;
    if (needed > 128) {
        heap_buffer.resize(needed);
        powers = heap_buffer.data();
    }
    int rest = cell;
    for (int k = 0; k < d; ++k) {
        double z = x(k);
        if (spec_.kind == BasisKind::PiecewisePoly) {
            const int index = rest % spec_.Q;
            rest /= spec_.Q;
            const double centre = -spec_.R + (index + 0.5) * cell_width_;
            z = (z - centre) / (0.5 * cell_width_);
        }
        double* row = powers + static_cast<std::size_t>(k) * (p + 1);
        row[0] = 1.0;
        for (int e = 1; e <= p; ++e) row[e] = row[e - 1] * z;
    }
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        double value = 1.0;
        for (int k = 0; k < d; ++k) value *= powers[static_cast<std::size_t>(k) * (p + 1) + exponents_[i][k]];
        out(static_cast<Eigen::Index>(i)) = value;
    }
    if (spec_.kind == BasisKind::GlobalPolyPlusPayoff && spec_.include_payoff)
        out(local_size_ - 1) = payoff_(x);
}

Vector Basis::evaluate(const Vector& x) const {
    if (x.size() != spec_.d)
        throw ContractViolation("Basis: point has length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(spec_.d));
    Vector out = Vector::Zero(size());
    const int cell = locate(x);
    if (cell < 0) return out;
    Vector local;
    evaluate_local(x, cell, local);
    out.segment(static_cast<Eigen::Index>(cell) * local_size_, local_size_) = local;
    return out;
}

}  // namespace sdecv
