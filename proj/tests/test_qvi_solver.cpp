#include <catch_amalgamated.hpp>

#include "small_config.hpp"

#include "liq/errors.hpp"
#include "liq/qvi_solver.hpp"

#include <cmath>
#include <map>

using namespace liq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using liq::testing::small_config;

namespace {

std::size_t index_of(const std::vector<double>& axis, double v) {
    for (std::size_t i = 0; i < axis.size(); ++i)
        if (axis[i] == v) return i;
    FAIL("value not on axis");
    return 0;
}

Scheme scheme_of(SchemeKind kind, double eps = 0.05) {
    switch (kind) {
    case SchemeKind::Raw: return Scheme::raw();
    case SchemeKind::FixedFee: return Scheme::fixed_fee(eps);
    case SchemeKind::UtilityPenalty: return Scheme::utility_penalty(eps);
    }
    return Scheme::raw();
}

struct Solved {
    QviSolver solver;
    QviSolver::Result result;
};

const Solved& solved(SchemeKind kind) {
    static std::map<SchemeKind, Solved> cache;
    auto it = cache.find(kind);
    if (it == cache.end()) {
        const SolveConfig cfg = small_config(scheme_of(kind));
        QviSolver solver(cfg);
        QviSolver::Result r = solver.solve();
        it = cache.emplace(kind, Solved{std::move(solver), std::move(r)}).first;
    }
    return it->second;
}

template <class F>
void for_each_node(const GridSpec& g, F&& f) {
    for (std::size_t k = 0; k < g.t.size(); ++k)
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) f(k, ix, iy, ip, j);
}

double u_of(const UtilityParams& u, double x) { return x > 0.0 ? utility(u, x) : 0.0; }

const SchemeKind kAllKinds[] = {SchemeKind::Raw, SchemeKind::FixedFee, SchemeKind::UtilityPenalty};

} // namespace

TEST_CASE("terminal value at a node where the full sale is optimal") {
    // p axis starts at exactly 1 and the theta axis ends at exactly T = 1
    SolveConfig cfg = small_config();
    cfg.grid.p_min = 1.0;
    cfg.grid.p_max = 2.0;
    const QviSolver solver(cfg);
    const GridSpec& g = solver.grid();
    std::vector<double> values(g.layer_size());
    std::vector<std::int16_t> policy(g.layer_size());
    solver.terminal_values(values.data(), policy.data());

    const std::size_t ix = index_of(g.x, 0.0), iy = index_of(g.y, 1.0);
    const std::size_t j = g.ntheta() - 1;
    REQUIRE(g.p[0] == 1.0);
    REQUIRE(g.theta[j] == 1.0);
    // sqrt(0.9 / e - 0.05)
    CHECK_THAT(values[g.node(ix, iy, 0, j)], WithinRel(0.530180626819104, 1e-13));
    // the fee liquidation value already attains it, so no explicit trade is recorded
    CHECK(policy[g.node(ix, iy, 0, j)] == Policy::kContinue);
}

TEST_CASE("terminal layer satisfies the relaxed terminal condition") {
    for (SchemeKind kind : kAllKinds) {
        const SolveConfig cfg = small_config(scheme_of(kind));
        const QviSolver solver(cfg);
        const GridSpec& g = solver.grid();
        std::vector<double> v(g.layer_size());
        std::vector<std::int16_t> pol(g.layer_size());
        solver.terminal_values(v.data(), pol.data());
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 1; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) {
                        if (!solver.solvent(ix, iy, ip, j)) continue;
                        const std::size_t n = g.node(ix, iy, ip, j);
                        const double L = std::max(
                            0.0, liquidation_value(solver.impact(), solver.node_state(ix, iy, ip, j), cfg.scheme));
                        const double imp = solver.impulse_max(nullptr, ix, iy, ip, j, true).value;
                        REQUIRE_THAT(std::min(v[n] - u_of(cfg.utility, L), v[n] - imp), WithinAbs(0.0, 1e-10));
                        // impulse_max in terminal mode is the inner sup of the terminal layer
                        if (pol[n] != Policy::kContinue) REQUIRE(v[n] == imp);
                    }
    }
}

TEST_CASE("terminal values under Raw at zero lag are the utility of cash") {
    const SolveConfig cfg = small_config(Scheme::raw());
    const QviSolver solver(cfg);
    const GridSpec& g = solver.grid();
    std::vector<double> v(g.layer_size());
    std::vector<std::int16_t> pol(g.layer_size());
    solver.terminal_values(v.data(), pol.data());
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
        if (g.x[ix] < 0.0) continue;
        for (std::size_t iy = 0; iy < g.ny(); ++iy)
            for (std::size_t ip = 0; ip < g.np(); ++ip)
                REQUIRE(v[g.node(ix, iy, ip, 0)] == u_of(cfg.utility, g.x[ix]));
    }
}

TEST_CASE("continuation of a constant layer is the constant") {
    const QviSolver solver(small_config());
    const GridSpec& g = solver.grid();
    const std::vector<double> layer(g.layer_size(), 0.37);
    for (std::size_t ip = 0; ip < g.np(); ++ip)
        for (std::size_t j = 0; j < g.ntheta(); ++j)
            REQUIRE_THAT(solver.continuation(layer.data(), 3, 2, ip, j), WithinAbs(0.37, 1e-14));
}

TEST_CASE("continuation weights form a partition of unity") {
    const QviSolver solver(small_config());
    const GridSpec& g = solver.grid();
    for (std::size_t ip = 0; ip < g.np(); ++ip) {
        double total = 0.0;
        for (std::size_t src = 0; src < g.np(); ++src) {
            // Dirac layer: 1 on price node src, 0 elsewhere
            std::vector<double> layer(g.layer_size(), 0.0);
            for (std::size_t ix = 0; ix < g.nx(); ++ix)
                for (std::size_t iy = 0; iy < g.ny(); ++iy)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) layer[g.node(ix, iy, src, j)] = 1.0;
            const double w = solver.continuation(layer.data(), 1, 1, ip, 2);
            REQUIRE(w >= 0.0);
            double stored = 0.0;
            for (const auto& [i, wi] : solver.continuation_weights(ip))
                if (i == src) stored = wi;
            REQUIRE(w == stored);
            total += w;
        }
        REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("continuation with zero drift is a martingale on the Merton value") {
    SolveConfig cfg = small_config();
    cfg.market.b = 0.0;
    cfg.grid.p_count = 200;
    const QviSolver solver(cfg);
    const GridSpec& g = solver.grid();
    std::vector<double> layer(g.layer_size());
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
        for (std::size_t iy = 0; iy < g.ny(); ++iy)
            for (std::size_t ip = 0; ip < g.np(); ++ip)
                for (std::size_t j = 0; j < g.ntheta(); ++j)
                    layer[g.node(ix, iy, ip, j)] = merton_value(solver.node_state(ix, iy, ip, j));
    int checked = 0;
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
        for (std::size_t iy = 0; iy < g.ny(); ++iy)
            for (std::size_t ip = 0; ip < g.np(); ++ip) {
                // away from the clamped edges of the price axis
                if (g.p[ip] < 0.5 || g.p[ip] > 2.0) continue;
                const double expect = g.x[ix] + g.p[ip] * g.y[iy];
                const double got = solver.continuation(layer.data(), ix, iy, ip, 0);
                REQUIRE(std::abs(got - expect) <= 1e-4 * std::max(1.0, std::abs(expect)));
                ++checked;
            }
    CHECK(checked > 1000);
}

TEST_CASE("a larger epsilon lowers the impulse value") {
    for (SchemeKind kind : {SchemeKind::FixedFee, SchemeKind::UtilityPenalty}) {
        const QviSolver lo(small_config(scheme_of(kind, 0.05)));
        const QviSolver hi(small_config(scheme_of(kind, 0.1)));
        const GridSpec& g = lo.grid();
        REQUIRE(g == hi.grid());
        int strict = 0;
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 1; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ip += 3)
                    for (std::size_t j = 0; j < g.ntheta(); j += 2) {
                        const ImpulseResult a = lo.impulse_max(nullptr, ix, iy, ip, j, true);
                        const ImpulseResult b = hi.impulse_max(nullptr, ix, iy, ip, j, true);
                        if (!std::isfinite(a.value)) {
                            REQUIRE(!std::isfinite(b.value));
                            continue;
                        }
                        if (kind == SchemeKind::FixedFee && a.value <= 0.0) {
                            REQUIRE(b.value <= a.value);
                            continue;
                        }
                        REQUIRE(b.value < a.value);
                        ++strict;
                    }
        CHECK(strict > 100);
    }
}

TEST_CASE("an impulse from zero lag never beats continuing") {
    for (SchemeKind kind : {SchemeKind::FixedFee, SchemeKind::UtilityPenalty}) {
        const Solved& s = solved(kind);
        const GridSpec& g = s.solver.grid();
        for (std::size_t k = 0; k < g.t.size(); ++k)
            for (std::size_t ix = 0; ix < g.nx(); ++ix)
                for (std::size_t iy = 1; iy < g.ny(); ++iy)
                    for (std::size_t ip = 0; ip < g.np(); ++ip) {
                        if (!s.solver.solvent(ix, iy, ip, 0)) continue;
                        REQUIRE(s.result.policy.target[k * g.layer_size() + g.node(ix, iy, ip, 0)] ==
                                Policy::kContinue);
                    }
    }
}

TEST_CASE("no shares to trade: value is the utility of cash and the policy continues") {
    SolveConfig cfg = small_config();
    cfg.grid.y_count = 1;
    cfg.grid.y_max = 0.0;
    cfg.grid.x_min = -1.0;
    cfg.grid.x_max = 3.0;
    cfg.initial.y0 = 0.0;
    const QviSolver::Result r = backward_solve(cfg);
    const GridSpec& g = r.field.grid;
    for_each_node(g, [&](std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) {
        REQUIRE(r.field.at(k, ix, iy, ip, j) == u_of(cfg.utility, g.x[ix]));
    });
    for (std::int16_t t : r.policy.target) REQUIRE(t == Policy::kContinue);
    CHECK(r.report.trade_nodes == 0);
}

TEST_CASE("solved fields are pinned on the share boundary and zero in the corner") {
    for (SchemeKind kind : kAllKinds) {
        const Solved& s = solved(kind);
        const GridSpec& g = s.solver.grid();
        const UtilityParams& u = s.solver.config().utility;
        for_each_node(g, [&](std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) {
            const double v = s.result.field.at(k, ix, iy, ip, j);
            if (!s.solver.solvent(ix, iy, ip, j)) {
                REQUIRE(v == 0.0);
            } else if (iy == 0) {
                REQUIRE(std::abs(v - u_of(u, g.x[ix])) <= 1e-12);
                if (g.x[ix] == 0.0) REQUIRE(v == 0.0);
            }
        });
    }
}

TEST_CASE("solved fields sit inside the sandwich bounds") {
    for (SchemeKind kind : kAllKinds) {
        const Solved& s = solved(kind);
        const SolveReport& rep = s.result.report;
        CHECK(rep.lower_violations == 0);
        CHECK(rep.solvent_nodes > 0);
        CHECK(rep.delta_grid < 0.05 * rep.max_utility);
        CHECK(rep.uniqueness_guaranteed == (kind != SchemeKind::Raw));
        // the report agrees with a direct recount
        const GridSpec& g = s.solver.grid();
        const SolveConfig& cfg = s.solver.config();
        std::size_t below = 0;
        double worst = 0.0;
        for_each_node(g, [&](std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) {
            if (!s.solver.solvent(ix, iy, ip, j)) return;
            const State z = s.solver.node_state(ix, iy, ip, j);
            const double v = s.result.field.at(k, ix, iy, ip, j);
            const double L = std::max(0.0, liquidation_value(s.solver.impact(), z, cfg.scheme));
            if (v < u_of(cfg.utility, L) - cfg.scheme.penalty() - 1e-9) ++below;
            worst = std::max(worst, v - merton_bound(cfg.market, cfg.utility, g.t[k], z));
        });
        CHECK(below == 0);
        CHECK(worst == rep.delta_grid);
    }
}

TEST_CASE("second impulse pass leaves every layer unchanged") {
    for (SchemeKind kind : {SchemeKind::FixedFee, SchemeKind::UtilityPenalty}) {
        const SolveReport& rep = solved(kind).result.report;
        CHECK(rep.idempotence_layers == static_cast<std::size_t>(small_config().grid.nt) + 1);
        CHECK(rep.idempotence_change <= kTieTolerance);
    }
}

TEST_CASE("values are nondecreasing in cash across solvent nodes") {
    for (SchemeKind kind : kAllKinds) {
        const Solved& s = solved(kind);
        const GridSpec& g = s.solver.grid();
        for (std::size_t k = 0; k < g.t.size(); ++k)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) {
                        double prev = -1e300;
                        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
                            if (!s.solver.solvent(ix, iy, ip, j)) continue;
                            const double v = s.result.field.at(k, ix, iy, ip, j);
                            REQUIRE(v >= prev - 1e-12);
                            prev = v;
                        }
                    }
    }
}

TEST_CASE("recorded trades are admissible from their node") {
    for (SchemeKind kind : kAllKinds) {
        const Solved& s = solved(kind);
        const GridSpec& g = s.solver.grid();
        const Scheme& scheme = s.solver.config().scheme;
        std::size_t trades = 0;
        for_each_node(g, [&](std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) {
            const double e = s.result.policy.trade(k, ix, iy, ip, j);
            if (s.result.policy.target[k * g.layer_size() + g.node(ix, iy, ip, j)] == Policy::kContinue) return;
            ++trades;
            const State z = s.solver.node_state(ix, iy, ip, j);
            const auto iv = admissible_trades(s.solver.impact(), z, scheme);
            REQUIRE(iv);
            REQUIRE(e >= iv->lo - 1e-12);
            REQUIRE(e <= iv->hi + 1e-12);
        });
        CHECK(trades == s.result.report.trade_nodes);
        CHECK(trades > 0);
    }
}

TEST_CASE("doubling cash, price and fee scales the value by 2^gamma") {
    const SolveConfig base = small_config(Scheme::fixed_fee(0.05));
    SolveConfig scaled = base;
    scaled.scheme = Scheme::fixed_fee(0.1);
    scaled.grid.x_min *= 2.0;
    scaled.grid.x_max *= 2.0;
    scaled.grid.x_cluster *= 2.0;
    scaled.grid.p_min *= 2.0;
    scaled.grid.p_max *= 2.0;
    scaled.initial.p0 *= 2.0;
    scaled.initial.x0 *= 2.0;
    const QviSolver::Result a = backward_solve(base);
    const QviSolver::Result b = backward_solve(scaled);
    const double factor = std::pow(2.0, base.utility.gamma);
    REQUIRE(a.field.values.size() == b.field.values.size());
    double worst = 0.0;
    for (std::size_t n = 0; n < a.field.values.size(); ++n) {
        const double expect = factor * a.field.values[n];
        worst = std::max(worst, std::abs(b.field.values[n] - expect) / std::max(1e-300, std::abs(expect)) *
                                    (expect == 0.0 ? 0.0 : 1.0));
        if (expect == 0.0) REQUIRE(std::abs(b.field.values[n]) <= 1e-12);
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("a misaligned lag axis is a configuration error") {
    GridSpec g = build_grid(small_config());
    g.theta[2] += 1e-6;
    CHECK_THROWS_AS(check_grid(g, 1.0), ConfigError);
    g = build_grid(small_config());
    g.y[0] = 0.1;
    CHECK_THROWS_AS(check_grid(g, 1.0), ConfigError);
}

TEST_CASE("epsilon sweep on a small grid") {
    for (SchemeKind kind : {SchemeKind::FixedFee, SchemeKind::UtilityPenalty}) {
        const SweepReport rep = sweep_epsilon(small_config(scheme_of(kind)), {0.2, 0.1, 0.05});
        CHECK(rep.kind == kind);
        REQUIRE(rep.runs.size() == 3);
        REQUIRE(rep.steps.size() == 2);
        for (const EpsilonRun& r : rep.runs) CHECK(r.bracket_violations == 0);
        for (const EpsilonStep& s : rep.steps) CHECK(s.monotonicity_violations == 0);
        // gap over nodes solvent under the larger epsilon, recounted from fresh solves
        const double eps[] = {0.2, 0.1, 0.05};
        for (std::size_t i = 0; i < 2; ++i) {
            const QviSolver big(small_config(scheme_of(kind, eps[i])));
            const QviSolver::Result a = big.solve();
            const QviSolver::Result b = backward_solve(small_config(scheme_of(kind, eps[i + 1])));
            const GridSpec& g = big.grid();
            double gap = 0.0;
            for_each_node(g, [&](std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) {
                if (big.solvent(ix, iy, ip, j))
                    gap = std::max(gap, std::abs(b.field.at(k, ix, iy, ip, j) - a.field.at(k, ix, iy, ip, j)));
            });
            CHECK(rep.steps[i].cauchy_gap == gap);
            CHECK(rep.steps[i].cauchy_gap > 0.0);
        }
        CHECK(rep.runs[2].value_at_initial <= rep.raw_value_at_initial + 1e-10);
        CHECK_FALSE(rep.raw_report.uniqueness_guaranteed);
    }
}

TEST_CASE("degenerate and malformed epsilon lists") {
    const SweepReport one = sweep_epsilon(small_config(), {0.1});
    CHECK(one.runs.size() == 1);
    CHECK(one.steps.empty());
    CHECK_THROWS_AS(sweep_epsilon(small_config(), {}), ConfigError);
    CHECK_THROWS_AS(sweep_epsilon(small_config(), {0.05, 0.1}), ConfigError);
    CHECK_THROWS_AS(sweep_epsilon(small_config(), {0.1, 0.0}), ConfigError);
}
