#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sdecv/basis.hpp"

namespace sdecv {

/// Per-cell numerical diagnostics of a least-squares fit.
struct FitDiagnostics {
    std::vector<std::int64_t> cell_counts;
    /// lambda_max / lambda_min of the cell's Gram matrix (infinity when singular, 0 when empty).
    std::vector<double> condition;
    std::vector<bool> ridge_applied;
    int empty_cells = 0;
};

inline constexpr double kRidgeConditionThreshold = 1e12;
inline constexpr double kRidgeScale = 1e-8;

/// Streams (x, y) samples into the per-cell normal equations B a = b.
/// Samples outside the basis support are ignored. Cells never share data,
/// so the Gram matrix is block diagonal and each block is solved on its own.
class LeastSquaresAccumulator {
  public:
    LeastSquaresAccumulator(const Basis& basis, int outputs);

    /// Throws DataError on non-finite x or targets.
    void add(const Vector& x, const Vector& targets);
    void add(const Vector& x, double target);

    /// Adds the sufficient statistics of another accumulator over the same basis.
    void merge(const LeastSquaresAccumulator& other);

    std::int64_t samples() const { return samples_; }

    /// Coefficients, basis size x outputs. Empty cells get zero coefficients;
    /// a cell whose Gram matrix is singular or has condition above 1e12 is
    /// solved with the ridge term 1e-8 * trace(B) / q added to the diagonal.
    Matrix solve(FitDiagnostics* diagnostics = nullptr) const;

  private:
    const Basis* basis_;
    int outputs_;
    std::vector<Matrix> gram_;
    std::vector<Matrix> rhs_;
    std::vector<std::int64_t> counts_;
    std::int64_t samples_ = 0;
    Vector psi_;
    Vector single_;
};

struct FitResult {
    Vector coefficients;
    FitDiagnostics diagnostics;
};

/// Least-squares fit of targets on basis(inputs.row(n)). Throws
/// PreconditionError for N == 0 or, for the global basis, N <= basis size,
/// and DataError for non-finite data.
FitResult fit(const Basis& basis, const Matrix& inputs, const Vector& targets);

/// v if |v| <= bound, bound * sign(v) otherwise.
double truncate(double value, double bound);

/// Fitted coefficient functions g_{j,k}, j = 1..J (time step), k = 0..K-1
/// (output component), with an optional truncation bound. Coefficient
/// vectors are stored contiguously, step-major then component.
class CoefficientTable {
  public:
    CoefficientTable(Basis basis, int steps, int outputs, std::optional<double> bound = std::nullopt);

    const Basis& basis() const { return basis_; }
    int steps() const { return steps_; }
    int outputs() const { return outputs_; }
    std::optional<double> bound() const { return bound_; }

    /// alpha_{j,k}; j is 1-based, k 0-based.
    Eigen::Map<Vector> coefficients(int j, int k);
    Eigen::Map<const Vector> coefficients(int j, int k) const;
    const std::vector<double>& raw() const { return values_; }

    /// Truncated value of g_{j,k}(x). Throws PreconditionError on bad indices.
    double predict(int j, int k, const Vector& x) const;
    /// Same without index checks; `local` is scratch storage.
    double predict_unchecked(int j, int k, const Vector& x, Vector& local) const;
    /// All K components at step j into out (length K).
    void predict_all(int j, const Vector& x, Vector& local, Vector& out) const;

    bool operator==(const CoefficientTable& other) const;

  private:
    std::size_t offset(int j, int k) const;

    Basis basis_;
    int steps_;
    int outputs_;
    std::optional<double> bound_;
    std::vector<double> values_;
};

/// Binary layout (all little-endian):
///   "SDCVTAB1", u32 kind, u32 p, u32 d, u32 include_payoff, u32 Q, f64 R,
///   u32 J, u32 K, u32 basis_size, u8 has_bound, f64 bound,
///   J*K*basis_size f64 coefficients in (j, k)-major order.
void write_table(std::ostream& os, const CoefficientTable& table);
/// `payoff` must be supplied when the stored basis includes the payoff.
CoefficientTable read_table(std::istream& is, std::function<double(const Vector&)> payoff = {});

namespace binary {
void put_u32(std::ostream& os, std::uint32_t v);
void put_u64(std::ostream& os, std::uint64_t v);
void put_f64(std::ostream& os, double v);
std::uint32_t get_u32(std::istream& is);
std::uint64_t get_u64(std::istream& is);
double get_f64(std::istream& is);
}  // namespace binary

}  // namespace sdecv
