#pragma once

#include "liq/impact_model.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liq {

/// One market/portfolio point: cash x, shares y >= 0, price p > 0 and the lag
/// theta elapsed since the previous trade.
struct State {
    double x = 0.0;
    double y = 0.0;
    double p = 1.0;
    double theta = 0.0;

    friend bool operator==(const State&, const State&) = default;
};

struct MarketParams {
    double b = 0.1;
    double sigma = 0.3;
    double horizon = 1.0;

    friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

/// Power utility U(x) = K x^gamma with U(0) = 0.
struct UtilityParams {
    double K = 1.0;
    double gamma = 0.5;

    friend bool operator==(const UtilityParams&, const UtilityParams&) = default;
};

void check_parameters(const MarketParams& m);
void check_parameters(const UtilityParams& u);

enum class SchemeKind { Raw, FixedFee, UtilityPenalty };

std::string_view to_string(SchemeKind kind);
/// Accepts "raw", "fee" and "penalty".
SchemeKind parse_scheme_kind(std::string_view text);

/// How the epsilon perturbation enters: a cash fee per trade (FixedFee), a
/// utility charge per trade (UtilityPenalty) or not at all (Raw).
struct Scheme {
    SchemeKind kind = SchemeKind::Raw;
    double epsilon = 0.0;

    static Scheme raw() { return {SchemeKind::Raw, 0.0}; }
    static Scheme fixed_fee(double eps);
    static Scheme utility_penalty(double eps);

    /// Cash deducted per trade.
    double fee() const noexcept { return kind == SchemeKind::FixedFee ? epsilon : 0.0; }
    /// Utility deducted per trade.
    double penalty() const noexcept { return kind == SchemeKind::UtilityPenalty ? epsilon : 0.0; }

    friend bool operator==(const Scheme&, const Scheme&) = default;
};

/// Absolute band used to classify a state as lying on the liquidation boundary.
inline constexpr double kBoundaryTolerance = 1e-12;

/// Effective execution price p f(e, theta); infinite for purchases at theta = 0.
ImpactValue quote(const ImpactModel& impact, double e, double p, double theta);

/// Impulse map: trade e shares at the current price, reset theta to 0.
/// Throws ShortSaleError if y + e < 0 and InadmissibleTradeError for a
/// purchase at theta = 0. Does not check the post-trade solvency.
State apply_trade(const ImpactModel& impact, const State& s, double e, const Scheme& scheme);

/// L = x + y p f(-y, theta) for Raw/UtilityPenalty; max(x, L - eps) for FixedFee.
double liquidation_value(const ImpactModel& impact, const State& s, const Scheme& scheme);

/// Frictionless mark-to-market wealth x + p y.
inline double merton_value(const State& s) noexcept { return s.x + s.p * s.y; }

enum class Membership { Interior, BoundaryY, BoundaryL, Outside };

std::string_view to_string(Membership m);

/// Closed solvency region: everything except Outside.
inline bool is_solvent(Membership m) noexcept { return m != Membership::Outside; }

Membership in_solvency(const ImpactModel& impact, const State& s, const Scheme& scheme);

/// Largest admissible trade sup{e : e p f(e, theta) <= x - fee}. Nullopt when
/// that set is empty. Negative when the fee can only be paid out of a sale.
std::optional<double> max_buy(const ImpactModel& impact, const State& s, const Scheme& scheme);

struct TradeInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double e) const noexcept { return lo <= e && e <= hi; }
};

/// Trades leaving the state in the closed solvency region with y' >= 0, as
/// the interval [lo, hi]. lo = -y for every solvent state.
std::optional<TradeInterval> admissible_trades(const ImpactModel& impact, const State& s,
                                               const Scheme& scheme);

/// Throws DomainError for x < 0.
double utility(const UtilityParams& u, double x);

/// Smallest growth rate keeping K e^{rho (T - t)} L_M^gamma a supersolution.
double merton_rho(const MarketParams& m, const UtilityParams& u);

double merton_bound(const MarketParams& m, const UtilityParams& u, double t, const State& s);

struct BoundaryPoint {
    double y = 0.0;
    double x_min = 0.0;
};

/// Lower edge of the solvency region in the (y, x) plane at fixed (p, theta).
struct RegionBoundary {
    double p = 1.0;
    double theta = 0.0;
    std::vector<BoundaryPoint> points;
    /// Share count maximising the block-sale proceeds and those proceeds.
    double peak_y = 0.0;
    double peak_proceeds = 0.0;
    /// Fee corners y1 <= peak_y <= y2 where the proceeds equal the fee.
    std::optional<double> y1;
    std::optional<double> y2;
};

RegionBoundary region_boundary(const ImpactModel& impact, const Scheme& scheme, double p,
                               double theta, std::span<const double> y_grid);

} // namespace liq
