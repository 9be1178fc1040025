#include "liq/qvi_solver.hpp"

#include "liq/errors.hpp"
#include "liq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace liq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string node_text(const GridSpec& g, std::size_t k, std::size_t ix, std::size_t iy,
                      std::size_t ip, std::size_t j) {
    std::ostringstream os;
    os.precision(17);
    os << "t=" << g.t[k] << " x=" << g.x[ix] << " y=" << g.y[iy] << " p=" << g.p[ip]
       << " theta=" << g.theta[j];
    return os.str();
}

} // namespace

QviSolver::QviSolver(const SolveConfig& cfg, SolveOptions options)
    : cfg_(cfg), options_(options), grid_((validate(cfg), build_grid(cfg))), impact_(cfg.impact),
      gh_(gauss_hermite(cfg.grid.quadrature)) {
    const GridSpec& g = grid_;
    const double drift = (cfg_.market.b - 0.5 * cfg_.market.sigma * cfg_.market.sigma) * g.dt;
    const double vol = cfg_.market.sigma * std::sqrt(g.dt);

    weights_.resize(g.np());
    for (std::size_t ip = 0; ip < g.np(); ++ip) {
        std::vector<double> dense(g.np(), 0.0);
        for (std::size_t q = 0; q < gh_.nodes.size(); ++q) {
            const double next = std::clamp(g.p[ip] * std::exp(drift + vol * gh_.nodes[q]), g.p.front(),
                                           g.p.back());
            const std::size_t i = bracket(g.p, next);
            const double w = std::log(next / g.p[i]) / std::log(g.p[i + 1] / g.p[i]);
            dense[i] += gh_.weights[q] * (1.0 - w);
            dense[i + 1] += gh_.weights[q] * w;
        }
        for (std::size_t i = 0; i < g.np(); ++i) {
            if (dense[i] != 0.0) weights_[ip].emplace_back(i, dense[i]);
        }
    }

    mask_.resize(g.layer_size());
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
        for (std::size_t iy = 0; iy < g.ny(); ++iy)
            for (std::size_t ip = 0; ip < g.np(); ++ip)
                for (std::size_t j = 0; j < g.ntheta(); ++j) {
                    const Membership m = in_solvency(impact_, node_state(ix, iy, ip, j), cfg_.scheme);
                    mask_[g.node(ix, iy, ip, j)] = is_solvent(m) ? 1 : 0;
                }

    cost_.resize(g.ny() * g.ny() * g.ntheta());
    for (std::size_t from = 0; from < g.ny(); ++from)
        for (std::size_t to = 0; to < g.ny(); ++to)
            for (std::size_t j = 0; j < g.ntheta(); ++j) {
                const ImpactValue f = impact_.impact(g.y[to] - g.y[from], g.theta[j]);
                cost_[(from * g.ny() + to) * g.ntheta() + j] = f.is_infinite() ? kNaN : f.value();
            }

    x_utility_.resize(g.nx());
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
        x_utility_[ix] = g.x[ix] > 0.0 ? utility(cfg_.utility, g.x[ix]) : 0.0;
}

State QviSolver::node_state(std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) const {
    return {grid_.x[ix], grid_.y[iy], grid_.p[ip], grid_.theta[j]};
}

double QviSolver::pinned_value(std::size_t ix, std::size_t) const { return x_utility_[ix]; }

double QviSolver::continuation(const double* next_layer, std::size_t ix, std::size_t iy,
                               std::size_t ip, std::size_t j) const {
    const std::size_t jn = std::min<std::size_t>(j + 1, grid_.ntheta() - 1);
    double acc = 0.0;
    for (const auto& [src, w] : weights_[ip]) acc += w * next_layer[grid_.node(ix, iy, src, jn)];
    return acc;
}

ImpulseResult QviSolver::impulse_max(const double* targets, std::size_t ix, std::size_t iy,
                                     std::size_t ip, std::size_t j, bool terminal) const {
    const GridSpec& g = grid_;
    const double x = g.x[ix];
    const double p = g.p[ip];
    const double fee = cfg_.scheme.fee();
    ImpulseResult best;
    for (std::size_t to = 0; to < g.ny(); ++to) {
        // f(e, theta) here, so that e * (p * f) rounds exactly as in apply_trade
        const double f = cost(iy, to, j);
        if (std::isnan(f)) continue;
        const double e = g.y[to] - g.y[iy];
        double xp = x - e * (p * f) - fee;
        if (xp < -kCashTolerance) continue;
        xp = std::max(xp, 0.0);
        double v;
        if (to == 0 || terminal) {
            v = xp > 0.0 ? utility(cfg_.utility, xp) : 0.0;
        } else if (xp >= g.x.back()) {
            v = targets[g.node(g.nx() - 1, to, ip, 0)];
        } else {
            const std::size_t i = bracket(g.x, xp);
            const double w = (xp - g.x[i]) / (g.x[i + 1] - g.x[i]);
            const double a = targets[g.node(i, to, ip, 0)];
            const double b = targets[g.node(i + 1, to, ip, 0)];
            v = a + w * (b - a);
        }
        v -= cfg_.scheme.penalty();
        if (v > best.value) {
            best.value = v;
            best.target = static_cast<std::int16_t>(to);
            best.trade = e;
        }
    }
    return best;
}

void QviSolver::terminal_values(double* values, std::int16_t* policy) const {
    const GridSpec& g = grid_;
    parallel_for(
        g.nx() * g.ny(),
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t c = begin; c < end; ++c) {
                const std::size_t ix = c / g.ny();
                const std::size_t iy = c % g.ny();
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) {
                        const std::size_t n = g.node(ix, iy, ip, j);
                        policy[n] = Policy::kContinue;
                        if (!mask_[n]) {
                            values[n] = 0.0;
                            continue;
                        }
                        if (iy == 0) {
                            values[n] = pinned_value(ix, iy);
                            continue;
                        }
                        const double L = std::max(
                            0.0, liquidation_value(impact_, node_state(ix, iy, ip, j), cfg_.scheme));
                        const double base = L > 0.0 ? utility(cfg_.utility, L) : 0.0;
                        const ImpulseResult imp = impulse_max(nullptr, ix, iy, ip, j, true);
                        if (imp.value > base + kTieTolerance) {
                            values[n] = imp.value;
                            policy[n] = imp.target;
                        } else {
                            values[n] = base;
                        }
                    }
            }
        },
        options_.threads);
}

double QviSolver::solve_layer(std::size_t k, const double* next, double* values,
                              std::int16_t* policy) const {
    const GridSpec& g = grid_;
    const std::size_t columns = g.nx() * g.ny();
    std::vector<double> cont(g.layer_size());

    parallel_for(
        columns,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t c = begin; c < end; ++c) {
                const std::size_t ix = c / g.ny();
                const std::size_t iy = c % g.ny();
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j)
                        cont[g.node(ix, iy, ip, j)] = continuation(next, ix, iy, ip, j);
            }
        },
        options_.threads);

    parallel_for(
        columns,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t c = begin; c < end; ++c) {
                const std::size_t ix = c / g.ny();
                const std::size_t iy = c % g.ny();
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) {
                        const std::size_t n = g.node(ix, iy, ip, j);
                        policy[n] = Policy::kContinue;
                        if (!mask_[n]) {
                            values[n] = 0.0;
                            continue;
                        }
                        if (iy == 0) {
                            values[n] = pinned_value(ix, iy);
                            continue;
                        }
                        const ImpulseResult imp = impulse_max(cont.data(), ix, iy, ip, j);
                        if (imp.value > cont[n] + kTieTolerance) {
                            values[n] = imp.value;
                            policy[n] = imp.target;
                        } else {
                            values[n] = cont[n];
                        }
                        if (!std::isfinite(values[n])) {
                            throw NumericError("non-finite value at " + node_text(g, k, ix, iy, ip, j));
                        }
                    }
            }
        },
        options_.threads);

    if (!options_.check_idempotence) return 0.0;
    std::mutex m;
    double change = 0.0;
    parallel_for(
        columns,
        [&](std::size_t begin, std::size_t end) {
            double local = 0.0;
            for (std::size_t c = begin; c < end; ++c) {
                const std::size_t ix = c / g.ny();
                const std::size_t iy = c % g.ny();
                if (iy == 0) continue;
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) {
                        const std::size_t n = g.node(ix, iy, ip, j);
                        if (!mask_[n]) continue;
                        const ImpulseResult again = impulse_max(values, ix, iy, ip, j);
                        local = std::max(local, again.value - values[n]);
                    }
            }
            std::lock_guard lock(m);
            change = std::max(change, local);
        },
        options_.threads);
    return change;
}

QviSolver::Result QviSolver::solve() const {
    const GridSpec& g = grid_;
    Result r;
    r.field.grid = g;
    r.field.scheme = cfg_.scheme;
    r.field.utility = cfg_.utility;
    r.field.values.assign(g.total_size(), 0.0);
    r.policy.grid = g;
    r.policy.target.assign(g.total_size(), Policy::kContinue);
    r.report.uniqueness_guaranteed = cfg_.scheme.kind != SchemeKind::Raw;

    const std::size_t nt = static_cast<std::size_t>(g.nt);
    terminal_values(r.field.layer(nt), r.policy.target.data() + nt * g.layer_size());

    auto record = [&](std::size_t k, double change) {
        r.report.idempotence_change = std::max(r.report.idempotence_change, change);
        ++r.report.idempotence_layers;
        if (cfg_.scheme.kind != SchemeKind::Raw && change > kTieTolerance) {
            std::ostringstream os;
            os << "second impulse pass changed layer t=" << g.t[k] << " by " << change;
            throw InvariantViolation(os.str());
        }
    };

    if (options_.check_idempotence) {
        // second pass on the terminal layer reads the sealed layer at theta = 0
        double change = 0.0;
        const double* layer = r.field.layer(nt);
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 1; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) {
                        const std::size_t n = g.node(ix, iy, ip, j);
                        if (!mask_[n]) continue;
                        change = std::max(change, impulse_max(layer, ix, iy, ip, j).value - layer[n]);
                    }
        record(nt, change);
    }

    for (std::size_t k = nt; k-- > 0;) {
        const double change = solve_layer(k, r.field.layer(k + 1), r.field.layer(k),
                                          r.policy.target.data() + k * g.layer_size());
        if (options_.check_idempotence) record(k, change);
    }

    r.report.trade_nodes = static_cast<std::size_t>(
        std::count_if(r.policy.target.begin(), r.policy.target.end(),
                      [](std::int16_t t) { return t != Policy::kContinue; }));
    fill_report(r.field, r.report);
    return r;
}

void QviSolver::fill_report(const ValueField& field, SolveReport& report) const {
    const GridSpec& g = grid_;
    report.solvent_nodes = 0;
    report.lower_violations = 0;
    report.upper_excess_nodes = 0;
    report.delta_grid = 0.0;
    report.max_utility = 0.0;
    for (std::size_t k = 0; k < g.t.size(); ++k)
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) {
                        if (!mask_[g.node(ix, iy, ip, j)]) continue;
                        ++report.solvent_nodes;
                        const State s = node_state(ix, iy, ip, j);
                        const double v = field.at(k, ix, iy, ip, j);
                        const double L = std::max(0.0, liquidation_value(impact_, s, cfg_.scheme));
                        const double lower =
                            (L > 0.0 ? utility(cfg_.utility, L) : 0.0) - cfg_.scheme.penalty();
                        if (v < lower - 1e-9) ++report.lower_violations;
                        const double upper = merton_bound(cfg_.market, cfg_.utility, g.t[k], s);
                        if (v > upper) {
                            ++report.upper_excess_nodes;
                            report.delta_grid = std::max(report.delta_grid, v - upper);
                        }
                        const double lm = merton_value(s);
                        if (lm > 0.0)
                            report.max_utility = std::max(report.max_utility, utility(cfg_.utility, lm));
                    }
}

QviSolver::Result backward_solve(const SolveConfig& cfg, SolveOptions options) {
    return QviSolver(cfg, options).solve();
}

SweepReport sweep_epsilon(const SolveConfig& cfg, const std::vector<double>& eps_list,
                          SolveOptions options) {
    if (eps_list.empty()) throw ConfigError("epsilons", "need at least one epsilon");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw ConfigError("epsilons", "every epsilon must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("epsilons", "must be sorted strictly decreasing");
    }
    const SchemeKind kind =
        cfg.scheme.kind == SchemeKind::Raw ? SchemeKind::FixedFee : cfg.scheme.kind;
    const State init = cfg.initial.state();

    SweepReport rep;
    rep.kind = kind;

    SolveConfig raw_cfg = cfg;
    raw_cfg.scheme = Scheme::raw();
    std::vector<double> raw;
    {
        QviSolver::Result r = backward_solve(raw_cfg, options);
        rep.raw_report = r.report;
        rep.raw_value_at_initial = value_at(r.field, cfg.initial.t0, init);
        raw = std::move(r.field.values);
    }

    std::vector<double> prev;
    std::vector<std::uint8_t> prev_mask; // solvency under the previous, larger epsilon
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        SolveConfig c = cfg;
        c.scheme = kind == SchemeKind::FixedFee ? Scheme::fixed_fee(eps_list[i])
                                                : Scheme::utility_penalty(eps_list[i]);
        const QviSolver solver(c, options);
        QviSolver::Result r = solver.solve();
        const std::vector<double>& v = r.field.values;
        const GridSpec& g = solver.grid();

        EpsilonRun run;
        run.epsilon = eps_list[i];
        run.report = r.report;
        run.value_at_initial = value_at(r.field, cfg.initial.t0, init);
        for (std::size_t n = 0; n < v.size(); ++n) {
            if (v[n] > raw[n] + 1e-10) ++run.bracket_violations;
        }
        rep.runs.push_back(run);

        if (!prev.empty()) {
            EpsilonStep step;
            step.eps_from = eps_list[i - 1];
            step.eps_to = eps_list[i];
            for (std::size_t n = 0; n < v.size(); ++n) {
                const double d = v[n] - prev[n];
                if (d < -1e-10) {
                    ++step.monotonicity_violations;
                    step.worst_violation = std::max(step.worst_violation, -d);
                }
                // the fee regions shrink as epsilon grows; compare on the common domain
                if (prev_mask[n % g.layer_size()]) step.cauchy_gap = std::max(step.cauchy_gap, std::abs(d));
            }
            rep.steps.push_back(step);
        }
        prev_mask.assign(g.layer_size(), 0);
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j)
                        prev_mask[g.node(ix, iy, ip, j)] = solver.solvent(ix, iy, ip, j) ? 1 : 0;
        prev = std::move(r.field.values);
    }
    return rep;
}

} // namespace liq
