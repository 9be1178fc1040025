#include "liq/market_state.hpp"

#include "liq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace liq {

namespace {

// Largest point of [lo, hi] where pred holds, given pred(lo) && !pred(hi).
// Runs to machine resolution.
template <class Pred>
double bisect_last_true(Pred pred, double lo, double hi) {
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (pred(mid) ? lo : hi) = mid;
    }
    return lo;
}

// e p f(e, theta), +inf for an unbounded purchase price.
double cash_cost(const ImpactModel& impact, double e, double p, double theta) {
    const ImpactValue f = impact.impact(e, theta);
    if (f.is_infinite()) return std::numeric_limits<double>::infinity();
    return e * (p * f.value());
}

double sale_proceeds(const ImpactModel& impact, double y, double p, double theta) {
    return y * (p * impact.impact(-y, theta).value());
}

} // namespace

void check_parameters(const MarketParams& m) {
    if (!std::isfinite(m.b)) throw ConfigError("market.b", "must be finite");
    if (!(std::isfinite(m.sigma) && m.sigma > 0.0))
        throw ConfigError("market.sigma", "must be finite and positive");
    if (!(std::isfinite(m.horizon) && m.horizon > 0.0))
        throw ConfigError("market.T", "must be finite and positive");
}

void check_parameters(const UtilityParams& u) {
    if (!(std::isfinite(u.K) && u.K >= 0.0)) throw ConfigError("utility.K", "must be >= 0");
    if (!(u.gamma >= 0.0 && u.gamma < 1.0)) throw ConfigError("utility.gamma", "must lie in [0, 1)");
}

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::Raw: return "raw";
    case SchemeKind::FixedFee: return "fee";
    case SchemeKind::UtilityPenalty: return "penalty";
    }
    return "?";
}

SchemeKind parse_scheme_kind(std::string_view text) {
    if (text == "raw") return SchemeKind::Raw;
    if (text == "fee") return SchemeKind::FixedFee;
    if (text == "penalty") return SchemeKind::UtilityPenalty;
    throw ConfigError("scheme.variant", "expected one of fee, penalty, raw; got '" +
                                            std::string(text) + "'");
}

Scheme Scheme::fixed_fee(double eps) {
    if (!(std::isfinite(eps) && eps > 0.0)) throw ConfigError("scheme.epsilon", "must be positive");
    return {SchemeKind::FixedFee, eps};
}

Scheme Scheme::utility_penalty(double eps) {
    if (!(std::isfinite(eps) && eps > 0.0)) throw ConfigError("scheme.epsilon", "must be positive");
    return {SchemeKind::UtilityPenalty, eps};
}

ImpactValue quote(const ImpactModel& impact, double e, double p, double theta) {
    const ImpactValue f = impact.impact(e, theta);
    if (f.is_infinite()) return f;
    return ImpactValue::finite(p * f.value());
}

State apply_trade(const ImpactModel& impact, const State& s, double e, const Scheme& scheme) {
    double y_new = s.y + e;
    if (y_new < 0.0) {
        if (y_new < -1e-12 * std::max(1.0, s.y)) {
            throw ShortSaleError("apply_trade: selling " + std::to_string(-e) + " of " +
                                 std::to_string(s.y) + " shares");
        }
        y_new = 0.0;
    }
    const ImpactValue q = quote(impact, e, s.p, s.theta);
    if (q.is_infinite()) {
        throw InadmissibleTradeError("apply_trade: purchase at zero lag has unbounded cost");
    }
    return {s.x - e * q.value() - scheme.fee(), y_new, s.p, 0.0};
}

double liquidation_value(const ImpactModel& impact, const State& s, const Scheme& scheme) {
    if (s.y == 0.0) return s.x;
    const double L = s.x + s.y * (s.p * impact.impact(-s.y, s.theta).value());
    if (scheme.kind == SchemeKind::FixedFee) return std::max(s.x, L - scheme.epsilon);
    return L;
}

std::string_view to_string(Membership m) {
    switch (m) {
    case Membership::Interior: return "interior";
    case Membership::BoundaryY: return "boundary_y";
    case Membership::BoundaryL: return "boundary_L";
    case Membership::Outside: return "outside";
    }
    return "?";
}

Membership in_solvency(const ImpactModel& impact, const State& s, const Scheme& scheme) {
    if (s.y < 0.0) return Membership::Outside;
    if (s.y == 0.0) return s.x >= -kBoundaryTolerance ? Membership::BoundaryY : Membership::Outside;
    const double L = liquidation_value(impact, s, scheme);
    if (std::abs(L) <= kBoundaryTolerance) return Membership::BoundaryL;
    return L > 0.0 ? Membership::Interior : Membership::Outside;
}

std::optional<double> max_buy(const ImpactModel& impact, const State& s, const Scheme& scheme) {
    const double budget = s.x - scheme.fee();
    if (s.theta == 0.0) {
        // sales fetch nothing, purchases cost infinitely much
        if (budget >= 0.0) return 0.0;
        return std::nullopt;
    }
    auto affordable = [&](double e) { return cash_cost(impact, e, s.p, s.theta) <= budget; };
    if (budget >= 0.0) {
        if (budget == 0.0) return 0.0;
        double hi = budget / (s.p * impact.ask_multiplier()) + 1.0;
        while (affordable(hi)) hi *= 2.0;
        return bisect_last_true(affordable, 0.0, hi);
    }
    // e p f(e, theta) is minimal at the sale peak and increasing to 0 on its right
    const double peak = impact.sale_peak(s.theta);
    if (!affordable(-peak)) return std::nullopt;
    return bisect_last_true(affordable, -peak, 0.0);
}

std::optional<TradeInterval> admissible_trades(const ImpactModel& impact, const State& s,
                                               const Scheme& scheme) {
    if (s.y < 0.0) return std::nullopt;
    const std::optional<double> hi = max_buy(impact, s, scheme);
    if (!hi) return std::nullopt;
    TradeInterval iv{-s.y, *hi};
    const double budget = s.x - scheme.fee();
    if (budget < 0.0 && s.theta > 0.0 && -s.y < -impact.sale_peak(s.theta)) {
        // left branch: too large a block sale cannot cover the deficit
        auto short_of = [&](double e) { return cash_cost(impact, e, s.p, s.theta) > budget; };
        if (short_of(-s.y)) {
            iv.lo = bisect_last_true(short_of, -s.y, -impact.sale_peak(s.theta));
            iv.lo = std::nextafter(iv.lo, 0.0);
        }
    }
    if (iv.hi < iv.lo) {
        if (iv.lo - iv.hi > 1e-12 * std::max(1.0, std::abs(iv.lo))) return std::nullopt;
        iv.hi = iv.lo;
    }
    return iv;
}

double utility(const UtilityParams& u, double x) {
    if (!(x >= 0.0)) throw DomainError("utility: negative wealth");
    if (x == 0.0) return 0.0;
    if (u.gamma == 0.0) return u.K;
    return u.K * std::pow(x, u.gamma);
}

double merton_rho(const MarketParams& m, const UtilityParams& u) {
    return u.gamma / (1.0 - u.gamma) * m.b * m.b / (2.0 * m.sigma * m.sigma);
}

double merton_bound(const MarketParams& m, const UtilityParams& u, double t, const State& s) {
    if (!(t >= 0.0 && t <= m.horizon)) throw DomainError("merton_bound: t outside [0, T]");
    if (u.gamma == 0.0) return u.K;
    const double lm = std::max(0.0, merton_value(s));
    return u.K * std::exp(merton_rho(m, u) * (m.horizon - t)) * std::pow(lm, u.gamma);
}

RegionBoundary region_boundary(const ImpactModel& impact, const Scheme& scheme, double p,
                               double theta, std::span<const double> y_grid) {
    if (!(p > 0.0)) throw DomainError("region_boundary: price must be positive");
    RegionBoundary rb;
    rb.p = p;
    rb.theta = theta;
    for (double y : y_grid) {
        const double proceeds = y == 0.0 ? 0.0 : sale_proceeds(impact, y, p, theta);
        const double x_min = scheme.kind == SchemeKind::FixedFee
                                 ? std::min(0.0, scheme.epsilon - proceeds)
                                 : 0.0 - proceeds; // +0 rather than -0 at y = 0
        rb.points.push_back({y, x_min});
    }
    rb.peak_y = impact.sale_peak(theta);
    rb.peak_proceeds = rb.peak_y > 0.0 ? sale_proceeds(impact, rb.peak_y, p, theta) : 0.0;

    const double eps = scheme.fee();
    if (eps > 0.0 && rb.peak_proceeds >= eps) {
        auto below = [&](double y) { return sale_proceeds(impact, y, p, theta) < eps; };
        rb.y1 = bisect_last_true(below, 0.0, rb.peak_y);
        auto above = [&](double y) { return sale_proceeds(impact, y, p, theta) >= eps; };
        double hi = 2.0 * rb.peak_y;
        while (above(hi)) hi *= 2.0;
        rb.y2 = bisect_last_true(above, rb.peak_y, hi);
    }
    return rb;
}

} // namespace liq
