#include "liq/mc_lab.hpp"

#include "liq/errors.hpp"
#include "liq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace liq {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t key_hash(std::uint64_t seed, std::uint64_t path, std::uint64_t slot) {
    return splitmix64(splitmix64(splitmix64(seed) ^ path) ^ slot);
}

double u_of(const UtilityParams& u, double x) { return x > 0.0 ? utility(u, x) : 0.0; }

// Closes the remaining position at the horizon: a block sale when it beats
// walking away with the cash, otherwise the shares are written off.
void settle(TradeSchedule& sched, State& s, std::size_t step, double t, const ImpactModel& impact,
            const Scheme& scheme) {
    if (s.y > 0.0) {
        const double L = liquidation_value(impact, s, Scheme::raw());
        if (L - scheme.fee() > s.x) {
            const State after = apply_trade(impact, s, -s.y, scheme);
            sched.trades.push_back({step, t, -s.y, s.p, s, after, true});
            s = after;
        }
    }
    sched.x_T = s.x;
    sched.y_T = 0.0;
}

void finish(TradeSchedule& sched, const SolveConfig& cfg) {
    sched.payoff = sched.region_violation
                       ? 0.0
                       : u_of(cfg.utility, sched.x_T) -
                             cfg.scheme.penalty() * static_cast<double>(sched.penalised_trades());
}

} // namespace

double keyed_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    const std::uint64_t h1 = key_hash(seed, path, 2 * step);
    const std::uint64_t h2 = key_hash(seed, path, 2 * step + 1);
    const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;         // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

PricePath simulate_gbm(const MarketParams& m, double p0, const std::vector<double>& times,
                       std::uint64_t seed, std::uint64_t path_index) {
    if (!(p0 > 0.0)) throw DomainError("simulate_gbm: p0 must be positive");
    PricePath path;
    path.times = times;
    path.prices.resize(times.size());
    double log_growth = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) {
            const double dt = times[i] - times[i - 1];
            if (dt < 0.0) throw DomainError("simulate_gbm: times must be sorted");
            log_growth += (m.b - 0.5 * m.sigma * m.sigma) * dt +
                          m.sigma * std::sqrt(dt) * keyed_normal(seed, path_index, i - 1);
        }
        path.prices[i] = p0 * std::exp(log_growth);
    }
    return path;
}

std::vector<double> decision_times(const GridSpec& g, double t0) {
    std::vector<double> times{t0};
    for (double t : g.t) {
        if (t > t0 + 1e-12) times.push_back(t);
    }
    return times;
}

std::size_t TradeSchedule::penalised_trades() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(trades.begin(), trades.end(), [](const TradeRecord& r) { return !r.settlement; }));
}

PolicyRunner::PolicyRunner(const ValueField& field, const SolveConfig& cfg)
    : field_(field), cfg_(cfg), impact_(cfg.impact), gh_(gauss_hermite(field.grid.quadrature)),
      times_(decision_times(field.grid, cfg.initial.t0)) {}

double PolicyRunner::query(double t, State s) const {
    const GridSpec& g = field_.grid;
    s.x = std::clamp(s.x, g.x.front(), g.x.back());
    s.p = std::clamp(s.p, g.p.front(), g.p.back());
    s.theta = std::min(s.theta, g.theta.back());
    return value_at(field_, t, s);
}

double PolicyRunner::hold_value(double t_next, double dt, const State& s) const {
    const double drift = (cfg_.market.b - 0.5 * cfg_.market.sigma * cfg_.market.sigma) * dt;
    const double vol = cfg_.market.sigma * std::sqrt(dt);
    State next = s;
    next.theta = advance_lag(s.theta, dt, cfg_.market.horizon);
    double acc = 0.0;
    for (std::size_t q = 0; q < gh_.nodes.size(); ++q) {
        next.p = s.p * std::exp(drift + vol * gh_.nodes[q]);
        acc += gh_.weights[q] * query(t_next, next);
    }
    return acc;
}

TradeSchedule PolicyRunner::run(const PricePath& path) const {
    const GridSpec& g = field_.grid;
    const Scheme& scheme = cfg_.scheme;
    const double T = cfg_.market.horizon;
    TradeSchedule sched;
    sched.t0 = path.times.front();
    State s = cfg_.initial.state();
    s.theta = std::min(s.theta, T);
    s.p = path.prices.front();
    sched.initial = s;

    const std::size_t n = path.times.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = path.times[i];
        const bool last = i + 1 == n;
        s.p = path.prices[i];
        sched.visited.push_back(s);
        if (!is_solvent(in_solvency(impact_, s, scheme))) sched.region_violation = true;

        const double keep =
            last ? u_of(cfg_.utility, liquidation_value(impact_, s, scheme))
                 : hold_value(path.times[i + 1], path.times[i + 1] - t, s);
        double best = -std::numeric_limits<double>::infinity();
        State best_state;
        double best_e = 0.0;
        for (double y_to : g.y) {
            const double e = y_to - s.y;
            State post;
            try {
                post = apply_trade(impact_, s, e, scheme);
            } catch (const TradeError&) {
                continue;
            }
            if (post.x < -1e-12) continue;
            post.x = std::max(post.x, 0.0);
            const double v =
                (post.y == 0.0 || last ? u_of(cfg_.utility, post.x) : query(t, post)) - scheme.penalty();
            if (v > best) {
                best = v;
                best_state = post;
                best_e = e;
            }
        }
        if (best > keep + 1e-10) {
            sched.trades.push_back({i, t, best_e, s.p, s, best_state, false});
            s = best_state;
            if (!is_solvent(in_solvency(impact_, s, scheme))) sched.region_violation = true;
        }
        if (!last) s.theta = advance_lag(s.theta, path.times[i + 1] - t, T);
    }
    settle(sched, s, n - 1, path.times.back(), impact_, scheme);
    finish(sched, cfg_);
    return sched;
}

TradeSchedule run_policy(const ValueField& field, const SolveConfig& cfg, const PricePath& path) {
    return PolicyRunner(field, cfg).run(path);
}

std::string Baseline::name() const {
    switch (kind) {
    case BaselineKind::BlockNow: return "BlockNow";
    case BaselineKind::Tranches: return "Tranches(" + std::to_string(tranches) + ")";
    case BaselineKind::HoldToT: return "HoldToT";
    }
    return "?";
}

TradeSchedule run_baseline(const Baseline& b, const SolveConfig& cfg, const PricePath& path) {
    const PowerImpact impact(cfg.impact);
    const Scheme& scheme = cfg.scheme;
    const double T = cfg.market.horizon;
    const std::size_t n = path.times.size();
    TradeSchedule sched;
    sched.t0 = path.times.front();
    State s = cfg.initial.state();
    s.theta = std::min(s.theta, T);
    s.p = path.prices.front();
    sched.initial = s;

    std::vector<std::size_t> steps;
    switch (b.kind) {
    case BaselineKind::BlockNow: steps = {0}; break;
    case BaselineKind::HoldToT: steps = {n - 1}; break;
    case BaselineKind::Tranches: {
        if (b.tranches < 1) throw ConfigError("tranches", "need at least one tranche");
        const auto count = static_cast<std::size_t>(b.tranches);
        for (std::size_t i = 0; i < count; ++i) {
            steps.push_back(static_cast<std::size_t>(
                std::lround(static_cast<double>(i) * static_cast<double>(n - 1) / static_cast<double>(count))));
        }
        if (std::adjacent_find(steps.begin(), steps.end(), std::greater_equal<>()) != steps.end())
            sched.feasible = false; // more tranches than decision times
        break;
    }
    }
    const double slice = s.y / static_cast<double>(steps.size());

    std::size_t next_sale = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = path.times[i];
        s.p = path.prices[i];
        sched.visited.push_back(s);
        if (!is_solvent(in_solvency(impact, s, scheme))) sched.region_violation = true;
        if (sched.feasible && next_sale < steps.size() && steps[next_sale] == i) {
            const bool final_slice = next_sale + 1 == steps.size();
            const double e = -(final_slice ? s.y : std::min(slice, s.y));
            ++next_sale;
            if (e != 0.0) {
                const State post = apply_trade(impact, s, e, scheme);
                if (post.x < -1e-12 || !is_solvent(in_solvency(impact, post, scheme))) {
                    sched.feasible = false;
                } else {
                    const bool at_horizon = b.kind == BaselineKind::HoldToT;
                    sched.trades.push_back({i, t, e, s.p, s, post, at_horizon});
                    s = post;
                    s.x = std::max(s.x, 0.0);
                }
            }
        }
        if (i + 1 < n) s.theta = advance_lag(s.theta, path.times[i + 1] - t, T);
    }
    settle(sched, s, n - 1, path.times.back(), impact, scheme);
    finish(sched, cfg);
    return sched;
}

Estimate estimate_value(const std::vector<double>& payoffs) {
    Estimate e;
    e.n = payoffs.size();
    if (e.n == 0) return e;
    // shifted by the first sample: identical payoffs give an exact mean and zero error
    const double shift = payoffs.front();
    double sum = 0.0;
    for (double v : payoffs) sum += v - shift;
    e.mean = shift + sum / static_cast<double>(e.n);
    if (e.n > 1) {
        double ss = 0.0;
        for (double v : payoffs) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
    }
    constexpr double z95 = 1.959963984540054;
    e.ci_lo = e.mean - z95 * e.std_error;
    e.ci_hi = e.mean + z95 * e.std_error;
    return e;
}

PathCheck path_property_check(const TradeSchedule& schedule, const PricePath& path,
                              const SolveConfig& cfg) {
    PathCheck rep;
    const PowerImpact impact(cfg.impact);
    const double spread = std::min(cfg.impact.kappa_a - 1.0, 1.0 - cfg.impact.kappa_b);
    const State& z0 = schedule.initial;
    for (double p : path.prices) rep.shadow_sup = std::max(rep.shadow_sup, z0.x + z0.y * p);
    const double tol = 1e-12 * std::max(1.0, rep.shadow_sup);

    auto flag = [&](const TradeRecord& r, const char* what) {
        std::ostringstream os;
        os.precision(17);
        os << what << " at t=" << r.time << " (zeta=" << r.zeta << ")";
        rep.violations.push_back(os.str());
    };

    double last_time = -std::numeric_limits<double>::infinity();
    for (const TradeRecord& r : schedule.trades) {
        rep.spread_sum += spread * std::abs(r.zeta) * r.price;
        if (rep.spread_sum > rep.shadow_sup + tol) flag(r, "spread-cost sum above no-trade Merton sup");
        if (merton_value(r.after) > merton_value(r.before) + tol) flag(r, "Merton value increased by a trade");
        if (!(r.time > last_time)) flag(r, "trade times not strictly increasing");
        last_time = r.time;
        if (r.before.theta == 0.0 && r.zeta > 0.0) flag(r, "purchase at zero lag");
        if (r.after.x < -1e-12 || !is_solvent(in_solvency(impact, r.after, cfg.scheme)))
            flag(r, "post-trade state outside the solvency region");
    }
    if (schedule.liquidating && schedule.y_T != 0.0) rep.violations.push_back("shares left at the horizon");
    if (schedule.region_violation) rep.violations.push_back("visited state outside the solvency region");
    if (cfg.scheme.kind == SchemeKind::FixedFee &&
        cfg.scheme.epsilon * static_cast<double>(schedule.n_trades()) > rep.shadow_sup + tol) {
        rep.violations.push_back("trade count above the fee bound");
    }
    return rep;
}

MonteCarloReport run_monte_carlo(const ValueField& field, const SolveConfig& cfg,
                                 std::int64_t n_paths, std::uint64_t seed, int threads) {
    if (n_paths < 2) throw ConfigError("mc.n_paths", "must be >= 2");
    const PolicyRunner runner(field, cfg);
    const std::vector<Baseline> baselines = {
        {BaselineKind::BlockNow, 1}, {BaselineKind::Tranches, 4}, {BaselineKind::HoldToT, 1}};
    const auto n = static_cast<std::size_t>(n_paths);
    const std::size_t nb = baselines.size();

    MonteCarloReport rep;
    rep.rows.resize(n);
    std::vector<double> policy_payoff(n);
    std::vector<double> base_payoff(n * nb);
    std::vector<std::uint8_t> policy_bad(n), fee_bound_bad(n), base_bad(n * nb), base_infeasible(n * nb);

    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const PricePath path = simulate_gbm(cfg.market, cfg.initial.p0, runner.times(), seed, i);
                const TradeSchedule sched = runner.run(path);
                const PathCheck check = path_property_check(sched, path, cfg);
                policy_payoff[i] = sched.payoff;
                policy_bad[i] = !check.ok();
                fee_bound_bad[i] = std::any_of(check.violations.begin(), check.violations.end(),
                                               [](const std::string& v) { return v == "trade count above the fee bound"; });
                rep.rows[i] = {i, sched.n_trades(), sched.x_T, u_of(cfg.utility, sched.x_T), sched.payoff,
                               check.violations.size()};
                for (std::size_t b = 0; b < nb; ++b) {
                    const TradeSchedule bs = run_baseline(baselines[b], cfg, path);
                    base_payoff[b * n + i] = bs.payoff;
                    base_infeasible[b * n + i] = !bs.feasible;
                    base_bad[b * n + i] = !path_property_check(bs, path, cfg).ok();
                }
            }
        },
        threads);

    rep.policy.name = "policy";
    rep.policy.estimate = estimate_value(policy_payoff);
    rep.policy.violating_paths = static_cast<std::size_t>(std::count(policy_bad.begin(), policy_bad.end(), 1));
    rep.trade_count_violations = static_cast<std::size_t>(std::count(fee_bound_bad.begin(), fee_bound_bad.end(), 1));
    for (std::size_t b = 0; b < nb; ++b) {
        StrategySummary s;
        s.name = baselines[b].name();
        s.estimate = estimate_value(std::vector<double>(base_payoff.begin() + b * n, base_payoff.begin() + (b + 1) * n));
        s.infeasible = static_cast<std::size_t>(
            std::count(base_infeasible.begin() + b * n, base_infeasible.begin() + (b + 1) * n, 1));
        s.violating_paths = static_cast<std::size_t>(
            std::count(base_bad.begin() + b * n, base_bad.begin() + (b + 1) * n, 1));
        rep.baselines.push_back(s);
    }

    const PowerImpact impact(cfg.impact);
    const State z0 = cfg.initial.state();
    rep.lower_bound = u_of(cfg.utility, liquidation_value(impact, z0, cfg.scheme)) - cfg.scheme.penalty();
    rep.dp_value = value_at(field, cfg.initial.t0, z0);
    return rep;
}

} // namespace liq
