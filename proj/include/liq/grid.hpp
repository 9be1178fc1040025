#pragma once

#include "liq/solve_config.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace liq {

/// Tensor grid over (t, x, y, p, theta). theta and t share the step
/// dt = T / nt, so theta index j means theta = j * dt.
struct GridSpec {
    int nt = 0;
    double dt = 0.0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> p;
    std::vector<double> theta;
    int quadrature = 8;

    std::size_t nx() const noexcept { return x.size(); }
    std::size_t ny() const noexcept { return y.size(); }
    std::size_t np() const noexcept { return p.size(); }
    std::size_t ntheta() const noexcept { return theta.size(); }
    std::size_t layer_size() const noexcept { return nx() * ny() * np() * ntheta(); }
    std::size_t total_size() const noexcept { return t.size() * layer_size(); }

    /// Offset of a node inside one time layer, C-order (ix, iy, ip, j).
    std::size_t node(std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) const noexcept {
        return ((ix * ny() + iy) * np() + ip) * ntheta() + j;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cash levels c sinh(u) with u piecewise uniform on [asinh(lo/c), 0] and
/// [0, asinh(hi/c)], so 0 is a node whenever lo <= 0 <= hi.
std::vector<double> clustered_axis(double lo, double hi, int count, double cluster);

/// lo * exp(i h), last node exactly hi.
std::vector<double> log_axis(double lo, double hi, int count);

/// Uniform axis, last node exactly hi.
std::vector<double> uniform_axis(double lo, double hi, int count);

GridSpec build_grid(const SolveConfig& cfg);

/// Throws ConfigError if theta and t are misaligned, y[0] != 0, an axis is
/// unsorted or p is not strictly positive.
void check_grid(const GridSpec& g, double horizon);

/// FNV-1a over the raw bytes of an axis.
std::uint64_t fnv1a(const std::vector<double>& axis);

/// Index i with axis[i] <= v < axis[i + 1], clamped to [0, n - 2].
std::size_t bracket(const std::vector<double>& axis, double v);

} // namespace liq
