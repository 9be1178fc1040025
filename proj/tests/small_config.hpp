#pragma once

#include "liq/solve_config.hpp"

namespace liq::testing {

// Coarse grid that solves in well under a second.
inline SolveConfig small_config(Scheme scheme = Scheme::fixed_fee(0.05)) {
    SolveConfig cfg;
    cfg.scheme = scheme;
    cfg.grid.nt = 8;
    cfg.grid.x_count = 14;
    cfg.grid.y_count = 5;
    cfg.grid.p_count = 12;
    cfg.grid.quadrature = 6;
    resolve_grid_defaults(cfg, false, false, false, false);
    return cfg;
}

} // namespace liq::testing
