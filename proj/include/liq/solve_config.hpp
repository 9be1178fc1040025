#pragma once

#include "liq/impact_model.hpp"
#include "liq/market_state.hpp"

#include <cstdint>

namespace liq {

/// Discretisation parameters with every derived default already resolved.
struct GridParams {
    int nt = 40;
    double x_min = 0.0;
    double x_max = 0.0;
    int x_count = 30;
    /// Width of the asinh clustering of cash levels around 0.
    double x_cluster = 0.1;
    double y_max = 2.0;
    int y_count = 15;
    double p_min = 0.0;
    double p_max = 0.0;
    int p_count = 30;
    int quadrature = 8;

    friend bool operator==(const GridParams&, const GridParams&) = default;
};

struct InitialState {
    double x0 = 0.0;
    double y0 = 1.0;
    double p0 = 1.0;
    double theta0 = 0.5;
    double t0 = 0.0;

    State state() const { return {x0, y0, p0, theta0}; }

    friend bool operator==(const InitialState&, const InitialState&) = default;
};

struct McParams {
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 20240611;

    friend bool operator==(const McParams&, const McParams&) = default;
};

struct SolveConfig {
    MarketParams market;
    UtilityParams utility;
    ImpactParams impact;
    Scheme scheme = Scheme::fixed_fee(0.05);
    GridParams grid;
    InitialState initial;
    McParams mc;

    friend bool operator==(const SolveConfig&, const SolveConfig&) = default;
};

/// Fills grid ranges not fixed by the user: p in p0 exp(+-5 sigma sqrt(T)),
/// x in [-y_max p_max, max(x0, 0) + y_max p_max].
void resolve_grid_defaults(SolveConfig& cfg, bool x_min_set, bool x_max_set, bool p_min_set,
                           bool p_max_set);

/// The default acceptance configuration with derived ranges resolved.
SolveConfig default_config();

/// Range and consistency checks on every block. Throws ConfigError naming the
/// offending dotted key. The bid/ask ordering of the impact is not checked
/// here; see validate_assumptions.
void validate(const SolveConfig& cfg);

} // namespace liq
