#pragma once

#include "liq/impact_model.hpp"
#include "liq/market_state.hpp"
#include "liq/quadrature.hpp"
#include "liq/solve_config.hpp"
#include "liq/value_field.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace liq {

/// Standard normal keyed by (seed, path, step): a splitmix64 hash of the key
/// feeds Box-Muller, so any draw can be regenerated independently.
double keyed_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

struct PricePath {
    std::vector<double> times;
    std::vector<double> prices;
};

/// Exact lognormal increments between consecutive times.
PricePath simulate_gbm(const MarketParams& m, double p0, const std::vector<double>& times,
                       std::uint64_t seed, std::uint64_t path_index);

/// t0 followed by every grid time strictly after it.
std::vector<double> decision_times(const GridSpec& g, double t0);

struct TradeRecord {
    std::size_t step = 0;
    double time = 0.0;
    double zeta = 0.0;
    double price = 0.0;
    State before;
    State after;
    /// Forced sale of the remaining position at the horizon.
    bool settlement = false;
};

struct TradeSchedule {
    State initial;
    double t0 = 0.0;
    std::vector<TradeRecord> trades;
    /// State at each path time before that time's decision.
    std::vector<State> visited;
    double x_T = 0.0;
    double y_T = 0.0;
    /// Utility of X_T, minus epsilon per trade for the penalty scheme.
    double payoff = 0.0;
    bool liquidating = true;
    bool feasible = true;
    /// A visited or post-trade state fell outside the closed solvency region.
    bool region_violation = false;

    std::size_t n_trades() const noexcept { return trades.size(); }
    std::size_t penalised_trades() const noexcept;
};

/// Lag after waiting dt; the lag axis saturates at the horizon.
inline double advance_lag(double theta, double dt, double horizon) {
    return std::min(theta + dt, horizon);
}

/// Executes the solver's argmax along a path by re-optimising at every
/// decision time against interpolated values.
class PolicyRunner {
public:
    PolicyRunner(const ValueField& field, const SolveConfig& cfg);

    TradeSchedule run(const PricePath& path) const;

    const std::vector<double>& times() const noexcept { return times_; }

private:
    double hold_value(double t_next, double dt, const State& s) const;
    double query(double t, State s) const;

    const ValueField& field_;
    SolveConfig cfg_;
    PowerImpact impact_;
    GaussHermite gh_;
    std::vector<double> times_;
};

TradeSchedule run_policy(const ValueField& field, const SolveConfig& cfg, const PricePath& path);

enum class BaselineKind { BlockNow, Tranches, HoldToT };

struct Baseline {
    BaselineKind kind = BaselineKind::BlockNow;
    int tranches = 1;

    std::string name() const;
};

TradeSchedule run_baseline(const Baseline& b, const SolveConfig& cfg, const PricePath& path);

struct Estimate {
    std::size_t n = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Sample statistics accumulated in index order.
Estimate estimate_value(const std::vector<double>& payoffs);

struct PathCheck {
    double shadow_sup = 0.0;
    double spread_sum = 0.0;
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Pathwise structural checks: spread-cost partial sums below the no-trade
/// Merton sup, Merton value nonincreasing across trades, strictly increasing
/// trade times, no position left at the horizon, every post-trade state
/// solvent, no purchase at zero lag and epsilon N_T <= sup for the fee scheme.
PathCheck path_property_check(const TradeSchedule& schedule, const PricePath& path,
                              const SolveConfig& cfg);

struct PathRow {
    std::uint64_t path_id = 0;
    std::size_t n_trades = 0;
    double x_T = 0.0;
    double u_xT = 0.0;
    double payoff = 0.0;
    std::size_t violations = 0;
};

struct StrategySummary {
    std::string name;
    Estimate estimate;
    std::size_t infeasible = 0;
    std::size_t violating_paths = 0;
};

struct MonteCarloReport {
    std::vector<PathRow> rows;
    StrategySummary policy;
    std::vector<StrategySummary> baselines;
    double lower_bound = 0.0;
    double dp_value = 0.0;
    std::size_t trade_count_violations = 0;
};

/// Runs the policy and the BlockNow, Tranches(4) and HoldToT baselines on
/// n_paths paths, with property checks on every executed schedule.
MonteCarloReport run_monte_carlo(const ValueField& field, const SolveConfig& cfg,
                                 std::int64_t n_paths, std::uint64_t seed, int threads = 0);

} // namespace liq
