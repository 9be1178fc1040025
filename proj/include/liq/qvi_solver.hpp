#pragma once

#include "liq/grid.hpp"
#include "liq/market_state.hpp"
#include "liq/quadrature.hpp"
#include "liq/solve_config.hpp"
#include "liq/value_field.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace liq {

/// Absolute slack for the "continue wins ties" rule and the idempotence check.
inline constexpr double kTieTolerance = 1e-12;
/// Post-trade cash above -kCashTolerance is treated as solvent and clamped to 0.
inline constexpr double kCashTolerance = 1e-12;

struct ImpulseResult {
    /// -infinity when no candidate is admissible.
    double value = -std::numeric_limits<double>::infinity();
    /// Post-trade share index, Policy::kContinue when none is admissible.
    std::int16_t target = Policy::kContinue;
    double trade = 0.0;
};

struct SolveReport {
    bool uniqueness_guaranteed = true;
    std::size_t solvent_nodes = 0;
    std::size_t trade_nodes = 0;
    /// Nodes with v < lower bound - 1e-9; lower = U(L_eps) - penalty.
    std::size_t lower_violations = 0;
    /// Nodes with v above the Merton bound, and the largest excess.
    std::size_t upper_excess_nodes = 0;
    double delta_grid = 0.0;
    /// max over solvent nodes of U(L_M).
    double max_utility = 0.0;
    /// Largest change produced by a second impulse pass, over all layers.
    double idempotence_change = 0.0;
    std::size_t idempotence_layers = 0;
};

struct SolveOptions {
    int threads = 0;
    bool check_idempotence = true;
};

/// Backward induction over the (t, x, y, p, theta) grid of one configuration.
/// The layer operations are public so they can be tested in isolation.
class QviSolver {
public:
    explicit QviSolver(const SolveConfig& cfg, SolveOptions options = {});

    const GridSpec& grid() const noexcept { return grid_; }
    const SolveConfig& config() const noexcept { return cfg_; }
    const PowerImpact& impact() const noexcept { return impact_; }

    State node_state(std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) const;
    bool solvent(std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) const {
        return mask_[grid_.node(ix, iy, ip, j)] != 0;
    }

    /// Sparse interpolation weights (source p index, weight) of the one-step
    /// lognormal expectation from price node ip.
    const std::vector<std::pair<std::size_t, double>>& continuation_weights(std::size_t ip) const {
        return weights_[ip];
    }

    /// E[next(x, y, P', theta + dt)] from one layer of values, theta index capped at nt.
    double continuation(const double* next_layer, std::size_t ix, std::size_t iy, std::size_t ip,
                        std::size_t j) const;

    /// Best trade from a node against theta = 0 targets taken from `targets`
    /// (a full layer; only j = 0 entries are read). Terminal mode values a
    /// post-trade state by U(x') exactly. Penalty is already subtracted.
    ImpulseResult impulse_max(const double* targets, std::size_t ix, std::size_t iy,
                              std::size_t ip, std::size_t j, bool terminal = false) const;

    /// Terminal layer and its argmax.
    void terminal_values(double* values, std::int16_t* policy) const;

    /// Layer k < nt from layer k + 1. Returns the idempotence change when checked.
    double solve_layer(std::size_t k, const double* next, double* values, std::int16_t* policy) const;

    struct Result {
        ValueField field;
        Policy policy;
        SolveReport report;
    };
    Result solve() const;

    /// Sandwich bounds and slack over all solvent nodes of a solved field.
    void fill_report(const ValueField& field, SolveReport& report) const;

private:
    double pinned_value(std::size_t ix, std::size_t iy) const;

    SolveConfig cfg_;
    SolveOptions options_;
    GridSpec grid_;
    PowerImpact impact_;
    GaussHermite gh_;
    std::vector<std::vector<std::pair<std::size_t, double>>> weights_;
    std::vector<std::uint8_t> mask_;
    /// e f(e, theta_j) for e = y[to] - y[from]; NaN for unbounded purchases.
    std::vector<double> cost_;
    std::vector<double> x_utility_;

    double cost(std::size_t from, std::size_t to, std::size_t j) const {
        return cost_[(from * grid_.ny() + to) * grid_.ntheta() + j];
    }
};

/// Solves the configuration. Throws InvariantViolation if the fee or penalty
/// scheme fails the idempotence check.
QviSolver::Result backward_solve(const SolveConfig& cfg, SolveOptions options = {});

struct EpsilonStep {
    double eps_from = 0.0;
    double eps_to = 0.0;
    /// Nodes where the smaller epsilon gives a lower value than the larger one.
    std::size_t monotonicity_violations = 0;
    double worst_violation = 0.0;
    /// max |v_to - v_from| over nodes solvent under eps_from.
    double cauchy_gap = 0.0;
};

struct EpsilonRun {
    double epsilon = 0.0;
    /// Nodes above the Raw reference by more than 1e-10.
    std::size_t bracket_violations = 0;
    double value_at_initial = 0.0;
    SolveReport report;
};

struct SweepReport {
    SchemeKind kind = SchemeKind::FixedFee;
    double raw_value_at_initial = 0.0;
    SolveReport raw_report;
    std::vector<EpsilonRun> runs;
    std::vector<EpsilonStep> steps;
};

/// Solves the Raw reference and each epsilon (sorted decreasing) on the grid
/// of `cfg` with the scheme kind of `cfg`. At most three fields are held.
SweepReport sweep_epsilon(const SolveConfig& cfg, const std::vector<double>& eps_list,
                          SolveOptions options = {});

} // namespace liq
