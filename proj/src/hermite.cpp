#include "sdecv/hermite.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "sdecv/errors.hpp"

namespace sdecv {

double hermite(int k, double x) {
    if (k < 0 || k > kMaxHermiteOrder)
        throw DomainError("hermite: order " + std::to_string(k) + " outside [0, 30]");
    double prev = 1.0;
    if (k == 0) return prev;
    double cur = x;
    for (int n = 1; n < k; ++n) {
        const double next = (x * cur - std::sqrt(static_cast<double>(n)) * prev) / std::sqrt(n + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite family.
GaussHermiteRule gauss_hermite_rule(int n) {
    if (n <= 0) throw PreconditionError("gauss_hermite_rule: n must be positive");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
    }
    return rule;
}

}  // namespace sdecv
