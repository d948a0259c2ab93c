#pragma once

#include <functional>
#include <vector>

#include "sdecv/sde_model.hpp"

namespace sdecv {

enum class BasisKind { GlobalPolyPlusPayoff, PiecewisePoly };

struct BasisSpec {
    BasisKind kind = BasisKind::GlobalPolyPlusPayoff;
    int p = 3;  // maximal total degree
    int d = 1;
    double R = 1.0;  // piecewise only: half-width of [-R, R]^d
    int Q = 1;       // piecewise only: cells per axis
    bool include_payoff = true;

    bool operator==(const BasisSpec&) const = default;
};

BasisSpec global_basis(int p, int d, bool include_payoff = true);
BasisSpec piecewise_basis(int p, int d, double R, int Q);

/// Evaluator for a BasisSpec.
///
/// Global basis: all monomials x^l with |l| <= p in graded lexicographic
/// order (by total degree, then lexicographically descending exponent
/// vectors, so x1^2 precedes x1 x2 precedes x2^2), followed by f(x) when
/// include_payoff is set.
///
/// Piecewise basis: [-R, R]^d is cut into Q^d equal cubes, numbered with the
/// first coordinate varying fastest. Cube l carries the same graded-lex
/// monomials in the local variable (x - centre_l) / halfwidth and is zero
/// elsewhere; every function vanishes outside [-R, R]^d. Points on an interior
/// face belong to the cube on the upper side, points with x_k = R to the last cube.
class Basis {
  public:
    explicit Basis(BasisSpec spec, std::function<double(const Vector&)> payoff = {});

    const BasisSpec& spec() const { return spec_; }
    int dimension() const { return spec_.d; }
    /// Total number of basis functions.
    int size() const { return local_size_ * cells_; }
    /// Number of functions supported on one cell (the whole space for the global basis).
    int local_size() const { return local_size_; }
    int cell_count() const { return cells_; }
    const std::vector<std::vector<int>>& exponents() const { return exponents_; }

    /// Cell containing x, or -1 when x lies outside the support.
    int locate(const Vector& x) const;
    /// Values of the functions supported on `cell` at x (length local_size()).
    void evaluate_local(const Vector& x, int cell, Vector& out) const;
    /// Full basis vector; zero outside the cell of x.
    Vector evaluate(const Vector& x) const;

  private:
    BasisSpec spec_;
    std::function<double(const Vector&)> payoff_;
    std::vector<std::vector<int>> exponents_;
    int local_size_ = 0;
    int cells_ = 1;
    double cell_width_ = 0.0;
};

/// Graded lexicographic list of exponent vectors with total degree <= p.
std::vector<std::vector<int>> graded_lex_exponents(int p, int d);

}  // namespace sdecv
