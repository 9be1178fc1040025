#include "liq/solve_config.hpp"

#include "liq/errors.hpp"

#include <algorithm>
#include <cmath>

namespace liq {

void resolve_grid_defaults(SolveConfig& cfg, bool x_min_set, bool x_max_set, bool p_min_set,
                           bool p_max_set) {
    const double spread = 5.0 * cfg.market.sigma * std::sqrt(cfg.market.horizon);
    if (!p_min_set) cfg.grid.p_min = cfg.initial.p0 * std::exp(-spread);
    if (!p_max_set) cfg.grid.p_max = cfg.initial.p0 * std::exp(spread);
    const double reach = cfg.grid.y_max * cfg.grid.p_max;
    if (!x_min_set) cfg.grid.x_min = -reach;
    if (!x_max_set) cfg.grid.x_max = std::max(cfg.initial.x0, 0.0) + reach;
}

SolveConfig default_config() {
    SolveConfig cfg;
    resolve_grid_defaults(cfg, false, false, false, false);
    return cfg;
}

void validate(const SolveConfig& cfg) {
    check_parameters(cfg.market);
    check_parameters(cfg.utility);
    check_parameters(cfg.impact);

    const Scheme& s = cfg.scheme;
    if (s.kind != SchemeKind::Raw && !(std::isfinite(s.epsilon) && s.epsilon > 0.0))
        throw ConfigError("scheme.epsilon", "must be positive for the fee and penalty schemes");
    if (s.kind == SchemeKind::Raw && s.epsilon != 0.0)
        throw ConfigError("scheme.epsilon", "must be 0 for the raw scheme");

    const GridParams& g = cfg.grid;
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(field, what);
    };
    require(g.nt >= 1, "grid.nt", "must be >= 1");
    require(g.x_count >= 2, "grid.x_count", "must be >= 2");
    require(g.y_count >= 1, "grid.y_count", "must be >= 1");
    require(g.p_count >= 2, "grid.p_count", "must be >= 2");
    require(g.quadrature >= 1 && g.quadrature <= 64, "grid.quadrature", "must lie in [1, 64]");
    require(std::isfinite(g.x_min) && std::isfinite(g.x_max) && g.x_min < g.x_max, "grid.x_min",
            "must be finite and below grid.x_max");
    require(std::isfinite(g.x_cluster) && g.x_cluster > 0.0, "grid.x_cluster", "must be positive");
    require(std::isfinite(g.y_max) && (g.y_max > 0.0 || g.y_count == 1), "grid.y_max",
            "must be positive");
    require(std::isfinite(g.p_min) && g.p_min > 0.0, "grid.p_min", "must be positive");
    require(std::isfinite(g.p_max) && g.p_max > g.p_min, "grid.p_max", "must exceed grid.p_min");

    const InitialState& i = cfg.initial;
    const double T = cfg.market.horizon;
    require(i.t0 >= 0.0 && i.t0 < T, "initial.t0", "must lie in [0, T)");
    require(i.theta0 >= 0.0 && i.theta0 <= T, "initial.theta0", "must lie in [0, T]");
    require(i.y0 >= 0.0 && i.y0 <= (g.y_count == 1 ? 0.0 : g.y_max), "initial.y0",
            "must lie in [0, grid.y_max]");
    require(i.p0 >= g.p_min && i.p0 <= g.p_max, "initial.p0", "must lie in [grid.p_min, grid.p_max]");
    require(i.x0 >= g.x_min && i.x0 <= g.x_max, "initial.x0", "must lie in [grid.x_min, grid.x_max]");

    require(cfg.mc.n_paths >= 2, "mc.n_paths", "must be >= 2");
}

} // namespace liq
