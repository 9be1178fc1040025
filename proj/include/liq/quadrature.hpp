#pragma once

#include <vector>

namespace liq {

/// Nodes and weights integrating against the standard normal density:
/// sum_i w_i g(xi_i) ~= E[g(xi)], exact for polynomials of degree < 2 * order.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub-Welsch on the probabilists' Hermite recurrence. Nodes are sorted
/// ascending and symmetrised; weights sum to 1 up to rounding.
GaussHermite gauss_hermite(int order);

} // namespace liq
