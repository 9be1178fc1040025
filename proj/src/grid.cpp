#include "liq/grid.hpp"

#include "liq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace liq {

std::vector<double> uniform_axis(double lo, double hi, int count) {
    if (count == 1) return {lo};
    std::vector<double> a(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) a[i] = lo + (hi - lo) * i / (count - 1);
    a.back() = hi;
    return a;
}

std::vector<double> log_axis(double lo, double hi, int count) {
    std::vector<double> a(static_cast<std::size_t>(count));
    const double h = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) a[i] = lo * std::exp(h * i);
    a.front() = lo;
    a.back() = hi;
    return a;
}

std::vector<double> clustered_axis(double lo, double hi, int count, double cluster) {
    const double u_lo = std::asinh(lo / cluster);
    const double u_hi = std::asinh(hi / cluster);
    std::vector<double> u;
    if (lo < 0.0 && hi > 0.0 && count >= 3) {
        int n_neg = static_cast<int>(std::lround((count - 1) * (-u_lo) / (u_hi - u_lo)));
        n_neg = std::clamp(n_neg, 1, count - 2);
        const int n_pos = count - 1 - n_neg;
        for (int i = 0; i < n_neg; ++i) u.push_back(u_lo * (n_neg - i) / n_neg);
        u.push_back(0.0);
        for (int i = 1; i <= n_pos; ++i) u.push_back(u_hi * i / n_pos);
    } else {
        for (int i = 0; i < count; ++i) u.push_back(u_lo + (u_hi - u_lo) * i / (count - 1));
    }
    std::vector<double> a(u.size());
    std::transform(u.begin(), u.end(), a.begin(), [&](double v) { return cluster * std::sinh(v); });
    a.front() = lo;
    a.back() = hi;
    return a;
}

GridSpec build_grid(const SolveConfig& cfg) {
    const GridParams& gp = cfg.grid;
    GridSpec g;
    g.nt = gp.nt;
    g.dt = cfg.market.horizon / gp.nt;
    g.t.resize(gp.nt + 1);
    g.theta.resize(gp.nt + 1);
    for (int k = 0; k <= gp.nt; ++k) g.t[k] = g.theta[k] = g.dt * k;
    g.t.back() = g.theta.back() = cfg.market.horizon;
    g.x = clustered_axis(gp.x_min, gp.x_max, gp.x_count, gp.x_cluster);
    g.y = uniform_axis(0.0, gp.y_max, gp.y_count);
    g.p = log_axis(gp.p_min, gp.p_max, gp.p_count);
    g.quadrature = gp.quadrature;
    check_grid(g, cfg.market.horizon);
    return g;
}

void check_grid(const GridSpec& g, double horizon) {
    if (g.nt < 1 || g.t.size() != static_cast<std::size_t>(g.nt) + 1 || g.theta.size() != g.t.size())
        throw ConfigError("grid.nt", "time and lag axes must both have nt + 1 levels");
    if (std::abs(g.dt * g.nt - horizon) > 1e-12 * horizon)
        throw ConfigError("grid.nt", "time step does not divide the horizon");
    for (std::size_t k = 0; k < g.t.size(); ++k) {
        if (g.t[k] != g.theta[k] || std::abs(g.t[k] - g.dt * static_cast<double>(k)) > 1e-12 * horizon)
            throw ConfigError("grid.nt", "lag levels must coincide with time levels");
    }
    auto sorted = [](const std::vector<double>& a) {
        return std::adjacent_find(a.begin(), a.end(), std::greater_equal<>()) == a.end();
    };
    if (g.x.size() < 2 || !sorted(g.x)) throw ConfigError("grid.x_count", "cash axis must be increasing");
    if (g.y.empty() || g.y.front() != 0.0 || !sorted(g.y))
        throw ConfigError("grid.y_count", "share axis must start at 0 and increase");
    if (g.p.size() < 2 || !sorted(g.p) || !(g.p.front() > 0.0))
        throw ConfigError("grid.p_count", "price axis must be positive and increasing");
}

std::uint64_t fnv1a(const std::vector<double>& axis) {
    std::uint64_t h = 14695981039346656037ull;
    for (double v : axis) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 1099511628211ull;
        }
    }
    return h;
}

std::size_t bracket(const std::vector<double>& axis, double v) {
    const auto it = std::upper_bound(axis.begin(), axis.end(), v);
    const std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
    return std::min(i, axis.size() - 2);
}

} // namespace liq
