#include "liq/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace liq {

GaussHermite gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    // x He_n = He_{n+1} + n He_{n-1}: symmetric Jacobi matrix with off-diagonal sqrt(n)
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int n = 1; n < order; ++n) {
        J(n, n - 1) = J(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(J);
    if (solver.info() != Eigen::Success) throw std::runtime_error("gauss_hermite: eigensolve failed");

    GaussHermite gh;
    gh.nodes.resize(order);
    gh.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        gh.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        gh.weights[i] = v0 * v0;
    }
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double node = 0.5 * (gh.nodes[j] - gh.nodes[i]);
        const double w = 0.5 * (gh.weights[i] + gh.weights[j]);
        gh.nodes[i] = -node;
        gh.nodes[j] = node;
        gh.weights[i] = gh.weights[j] = w;
    }
    if (order % 2 == 1) gh.nodes[order / 2] = 0.0;
    const double total = std::accumulate(gh.weights.begin(), gh.weights.end(), 0.0);
    for (double& w : gh.weights) w /= total;
    return gh;
}

} // namespace liq
