#pragma once

#include <vector>

namespace sdecv {

inline constexpr int kMaxHermiteOrder = 30;

/// Normalised (probabilists') Hermite polynomial H_k with E[H_j(Z) H_k(Z)] = delta_jk
/// for standard normal Z. Evaluated by the three-term recurrence
/// x H_k = sqrt(k+1) H_{k+1} + sqrt(k) H_{k-1}. Throws DomainError for k > 30.
double hermite(int k, double x);

/// Gauss quadrature for the standard normal measure: sum_i w_i g(x_i) ~ E g(Z),
/// exact for polynomials of degree <= 2n-1. Nodes ascending, weights sum to 1.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermiteRule gauss_hermite_rule(int n);

}  // namespace sdecv
