#include "liq/commands.hpp"

#include "liq/config.hpp"
#include "liq/errors.hpp"
#include "liq/grid.hpp"
#include "liq/impact_model.hpp"
#include "liq/market_state.hpp"
#include "liq/mc_lab.hpp"
#include "liq/qvi_solver.hpp"
#include "liq/value_field.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace liq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFieldFile = "value_field.bin";
constexpr const char* kPolicyFile = "policy.bin";
constexpr const char* kManifestFile = "manifest.json";

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

json grid_json(const GridSpec& g) {
    return {{"nt", g.nt},
            {"dt", format_double(g.dt)},
            {"sizes", {g.t.size(), g.nx(), g.ny(), g.np(), g.ntheta()}},
            {"hash",
             {{"t", hex(fnv1a(g.t))},
              {"x", hex(fnv1a(g.x))},
              {"y", hex(fnv1a(g.y))},
              {"p", hex(fnv1a(g.p))},
              {"theta", hex(fnv1a(g.theta))}}}};
}

json report_json(const SolveReport& r) {
    return {{"uniqueness_guaranteed", r.uniqueness_guaranteed},
            {"solvent_nodes", r.solvent_nodes},
            {"trade_nodes", r.trade_nodes},
            {"sandwich_lower_violations", r.lower_violations},
            {"merton_excess_nodes", r.upper_excess_nodes},
            {"delta_grid", format_double(r.delta_grid)},
            {"max_utility", format_double(r.max_utility)},
            {"idempotence_change", format_double(r.idempotence_change)},
            {"idempotence_layers", r.idempotence_layers}};
}

json estimate_json(const Estimate& e) {
    return {{"n", e.n},
            {"mean", format_double(e.mean)},
            {"std_error", format_double(e.std_error)},
            {"ci95", {format_double(e.ci_lo), format_double(e.ci_hi)}}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

// Loads and validates a config, including the impact assumptions.
SolveConfig checked_config(const fs::path& path) {
    SolveConfig cfg = load_config(path);
    validate(cfg);
    const AssumptionReport rep =
        validate_assumptions(PowerImpact(cfg.impact), AssumptionSample::standard(cfg.market.horizon));
    if (!rep.ok()) {
        const AssumptionFailure& f = rep.failures.front();
        throw ConfigError("impact", "assumption check " + f.check + " failed: " + f.detail);
    }
    return cfg;
}

template <class Fn>
int guarded(CommandIO io, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        io.err << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvariantViolation& e) {
        io.err << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace

int cmd_solve(const fs::path& config, const fs::path& out_dir, CommandIO io) {
    return guarded(io, [&] {
        const SolveConfig cfg = checked_config(config);
        fs::create_directories(out_dir);
        const QviSolver::Result r = backward_solve(cfg);
        write_value_field(out_dir / kFieldFile, r.field);
        write_policy(out_dir / kPolicyFile, r.policy, cfg.scheme);

        const SolveReport& rep = r.report;
        json manifest = {{"config", config_to_json(cfg)},
                         {"grid", grid_json(r.field.grid)},
                         {"scheme", {{"variant", std::string(to_string(cfg.scheme.kind))},
                                     {"epsilon", format_double(cfg.scheme.epsilon)}}},
                         {"outside_region_value", "U(0)"},
                         {"files", {{"value_field", kFieldFile}, {"policy", kPolicyFile}}},
                         {"report", report_json(rep)},
                         {"value_at_initial",
                          format_double(value_at(r.field, cfg.initial.t0, cfg.initial.state()))}};
        write_text(out_dir / kManifestFile, manifest.dump(2) + "\n");

        io.out << "solved " << rep.solvent_nodes << " solvent nodes, scheme "
               << to_string(cfg.scheme.kind) << " eps=" << format_double(cfg.scheme.epsilon) << "\n";
        if (!rep.uniqueness_guaranteed) io.out << "raw scheme: no uniqueness guarantee\n";
        io.out << "sandwich violations: " << rep.lower_violations << "\n";
        io.out << "delta_grid: " << format_double(rep.delta_grid)
               << " (max U " << format_double(rep.max_utility) << ")\n";
        io.out << "value at initial state: " << manifest["value_at_initial"].get<std::string>() << "\n";
        if (rep.lower_violations > 0 || !(rep.delta_grid < 0.05 * rep.max_utility)) return int(kExitInvariant);
        return int(kExitOk);
    });
}

int cmd_simulate(const fs::path& field_dir, std::optional<std::int64_t> n_paths,
                 std::optional<std::uint64_t> seed, std::optional<fs::path> out_dir, CommandIO io) {
    return guarded(io, [&] {
        std::ifstream ms(field_dir / kManifestFile);
        if (!ms) throw std::runtime_error("missing " + (field_dir / kManifestFile).string());
        const json manifest = json::parse(ms);
        const SolveConfig cfg = config_from_json(manifest.at("config"));
        validate(cfg);
        const ValueField field = read_value_field(field_dir / kFieldFile, cfg.utility);
        if (!(field.grid.x == build_grid(cfg).x) || field.scheme != cfg.scheme)
            throw std::runtime_error("value field does not match its manifest");

        const std::int64_t paths = n_paths.value_or(cfg.mc.n_paths);
        const std::uint64_t s = seed.value_or(cfg.mc.seed);
        const MonteCarloReport rep = run_monte_carlo(field, cfg, paths, s);
        const fs::path dir = out_dir.value_or(field_dir);
        fs::create_directories(dir);

        std::string csv = "path_id,n_trades,X_T,U_XT,penalty_adjusted,violations\n";
        for (const PathRow& row : rep.rows) {
            csv += std::to_string(row.path_id) + "," + std::to_string(row.n_trades) + "," +
                   format_double(row.x_T) + "," + format_double(row.u_xT) + "," +
                   format_double(row.payoff) + "," + std::to_string(row.violations) + "\n";
        }
        write_text(dir / "paths.csv", csv);

        json summary = {{"n_paths", paths},
                        {"seed", s},
                        {"policy", estimate_json(rep.policy.estimate)},
                        {"policy_violating_paths", rep.policy.violating_paths},
                        {"trade_count_violations", rep.trade_count_violations},
                        {"lower_bound", format_double(rep.lower_bound)},
                        {"dp_value", format_double(rep.dp_value)}};
        json base = json::object();
        for (const StrategySummary& b : rep.baselines) {
            base[b.name] = {{"estimate", estimate_json(b.estimate)},
                            {"infeasible", b.infeasible},
                            {"violating_paths", b.violating_paths}};
        }
        summary["baselines"] = base;
        write_text(dir / "summary.json", summary.dump(2) + "\n");

        const Estimate& e = rep.policy.estimate;
        io.out << "policy mean " << format_double(e.mean) << " se " << format_double(e.std_error)
               << " (dp " << format_double(rep.dp_value) << ", lower " << format_double(rep.lower_bound)
               << ")\n";
        for (const StrategySummary& b : rep.baselines)
            io.out << b.name << " mean " << format_double(b.estimate.mean) << " se "
                   << format_double(b.estimate.std_error) << "\n";
        io.out << "violating policy paths: " << rep.policy.violating_paths << "\n";
        return rep.policy.violating_paths == 0 ? int(kExitOk) : int(kExitInvariant);
    });
}

int cmd_sweep(const fs::path& config, const std::vector<double>& eps, const fs::path& out_dir,
              CommandIO io) {
    return guarded(io, [&] {
        const SolveConfig cfg = checked_config(config);
        const SweepReport rep = sweep_epsilon(cfg, eps);
        fs::create_directories(out_dir);

        std::string steps = "eps_from,eps_to,monotonicity_violations,worst_violation,cauchy_gap\n";
        std::size_t violations = 0;
        for (const EpsilonStep& s : rep.steps) {
            steps += format_double(s.eps_from) + "," + format_double(s.eps_to) + "," +
                     std::to_string(s.monotonicity_violations) + "," + format_double(s.worst_violation) +
                     "," + format_double(s.cauchy_gap) + "\n";
            violations += s.monotonicity_violations;
        }
        write_text(out_dir / "sweep.csv", steps);

        std::string runs = "epsilon,bracket_violations,value_at_initial,sandwich_lower_violations,delta_grid\n";
        runs += "0," + std::string("0,") + format_double(rep.raw_value_at_initial) + "," +
                std::to_string(rep.raw_report.lower_violations) + "," +
                format_double(rep.raw_report.delta_grid) + "\n";
        for (const EpsilonRun& r : rep.runs) {
            runs += format_double(r.epsilon) + "," + std::to_string(r.bracket_violations) + "," +
                    format_double(r.value_at_initial) + "," + std::to_string(r.report.lower_violations) +
                    "," + format_double(r.report.delta_grid) + "\n";
            violations += r.bracket_violations;
        }
        write_text(out_dir / "sweep_runs.csv", runs);

        json j = {{"scheme", std::string(to_string(rep.kind))},
                  {"raw", {{"uniqueness_guaranteed", false},
                           {"value_at_initial", format_double(rep.raw_value_at_initial)}}},
                  {"steps", json::array()},
                  {"runs", json::array()}};
        for (const EpsilonStep& s : rep.steps)
            j["steps"].push_back({{"eps_from", format_double(s.eps_from)},
                                  {"eps_to", format_double(s.eps_to)},
                                  {"monotonicity_violations", s.monotonicity_violations},
                                  {"cauchy_gap", format_double(s.cauchy_gap)}});
        for (const EpsilonRun& r : rep.runs)
            j["runs"].push_back({{"epsilon", format_double(r.epsilon)},
                                 {"bracket_violations", r.bracket_violations},
                                 {"value_at_initial", format_double(r.value_at_initial)},
                                 {"report", report_json(r.report)}});
        write_text(out_dir / "sweep.json", j.dump(2) + "\n");

        io.out << "raw reference value " << format_double(rep.raw_value_at_initial)
               << " (no uniqueness guarantee)\n";
        for (const EpsilonRun& r : rep.runs)
            io.out << "eps " << format_double(r.epsilon) << ": value " << format_double(r.value_at_initial)
                   << ", above raw at " << r.bracket_violations << " nodes\n";
        for (const EpsilonStep& s : rep.steps)
            io.out << "eps " << format_double(s.eps_from) << " -> " << format_double(s.eps_to) << ": "
                   << s.monotonicity_violations << " monotonicity violations, cauchy gap "
                   << format_double(s.cauchy_gap) << "\n";
        return violations == 0 ? int(kExitOk) : int(kExitInvariant);
    });
}

int cmd_region(const std::optional<fs::path>& config, const std::vector<double>& thetas, double p,
               const std::optional<fs::path>& out_file, CommandIO io) {
    return guarded(io, [&] {
        SolveConfig cfg = config ? load_config(*config) : default_config();
        check_parameters(cfg.impact);
        if (thetas.empty()) throw ConfigError("thetas", "need at least one lag");
        for (double th : thetas)
            if (!(th >= 0.0)) throw ConfigError("thetas", "lags must be >= 0");
        if (!(p > 0.0)) throw ConfigError("p", "must be positive");
        const PowerImpact impact(cfg.impact);
        const std::vector<double> ys = uniform_axis(0.0, std::max(cfg.grid.y_max, 3.0), 301);

        std::string csv = "theta,y,x_min,y1,y2\n";
        for (double th : thetas) {
            const RegionBoundary rb = region_boundary(impact, cfg.scheme, p, th, ys);
            const std::string y1 = rb.y1 ? format_double(*rb.y1) : "nan";
            const std::string y2 = rb.y2 ? format_double(*rb.y2) : "nan";
            for (const BoundaryPoint& pt : rb.points)
                csv += format_double(th) + "," + format_double(pt.y) + "," + format_double(pt.x_min) + "," +
                       y1 + "," + y2 + "\n";
            const double depth = cfg.scheme.kind == SchemeKind::FixedFee
                                     ? std::max(0.0, rb.peak_proceeds - cfg.scheme.epsilon)
                                     : rb.peak_proceeds;
            io.err << "theta " << format_double(th) << ": max depth " << format_double(depth);
            if (rb.y1) io.err << ", corners y1=" << y1 << " y2=" << y2;
            io.err << "\n";
        }
        if (out_file) {
            write_text(*out_file, csv);
        } else {
            io.out << csv;
        }
        return int(kExitOk);
    });
}

std::vector<SuiteResult> run_invariant_suites(const SolveConfig& cfg, std::size_t n, std::uint64_t seed) {
    const PowerImpact impact(cfg.impact);
    const double T = cfg.market.horizon;
    const double spread = std::min(cfg.impact.kappa_a - 1.0, 1.0 - cfg.impact.kappa_b);
    std::mt19937_64 rng(seed);
    auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto random_state = [&] {
        return State{uniform(-2.0, 5.0), uniform(0.0, 5.0), uniform(0.2, 5.0), uniform(0.0, T)};
    };

    std::vector<SuiteResult> out;
    auto suite = [&](const std::string& name, const std::function<std::string()>& trial) {
        SuiteResult r;
        r.name = name;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string failure = trial();
            ++r.samples;
            if (!failure.empty()) {
                if (r.failures++ == 0) r.first_failure = failure;
            }
        }
        out.push_back(r);
    };
    auto at = [](const State& s) {
        std::ostringstream os;
        os.precision(17);
        os << "(x=" << s.x << ", y=" << s.y << ", p=" << s.p << ", theta=" << s.theta << ")";
        return os.str();
    };

    {
        AssumptionSample sample = AssumptionSample::standard(T);
        for (std::size_t i = 0; i < n; ++i) sample.sizes.push_back(uniform(-5.0, 5.0));
        const AssumptionReport rep = validate_assumptions(impact, sample);
        out.push_back({"impact_assumptions", rep.points_checked, rep.failures.size(),
                       rep.ok() ? "" : rep.failures.front().check + ": " + rep.failures.front().detail});
    }
    suite("impact_dtheta_fd", [&]() -> std::string {
        const double e = uniform(-5.0, -0.01);
        const double th = uniform(std::min(0.05, T), T);
        const double f = impact.impact(e, th).value();
        if (f < 1e-200) return {}; // underflowed; differences are meaningless
        // step scaled to the relative rate of change f'/f so the central difference stays accurate
        const double rate = std::abs(impact.impact_dtheta(e, th)) / f;
        const double h = 1e-6 * std::min(th, 1.0 / std::max(rate, 1e-12));
        const double fd =
            (impact.impact(e, th + h).value() - impact.impact(e, th - h).value()) / (2.0 * h);
        const double an = impact.impact_dtheta(e, th);
        if (std::abs(fd - an) <= 1e-6 * std::abs(an)) return {};
        return "e=" + std::to_string(e) + " theta=" + std::to_string(th);
    });
    suite("liquidation_below_merton", [&]() -> std::string {
        const State s = random_state();
        const double L = liquidation_value(impact, s, Scheme::raw());
        if (L < 0.0) return {};
        return L <= merton_value(s) ? std::string{} : at(s);
    });
    suite("jump_inequality", [&]() -> std::string {
        const State s = random_state();
        const double e = uniform(-s.y, 3.0);
        if (quote(impact, e, s.p, s.theta).is_infinite()) return {}; // no admissible purchase
        const State a = apply_trade(impact, s, e, Scheme::raw());
        const double bound = merton_value(s) - spread * std::abs(e) * s.p;
        const double tol = 1e-12 * std::max({1.0, std::abs(merton_value(s)), std::abs(e) * s.p});
        return merton_value(a) <= bound + tol ? std::string{} : at(s) + " e=" + std::to_string(e);
    });
    suite("full_sale", [&]() -> std::string {
        const State s = random_state();
        const State raw = apply_trade(impact, s, -s.y, Scheme::raw());
        const State fee = apply_trade(impact, s, -s.y, Scheme{SchemeKind::FixedFee, 0.05});
        const bool ok = raw.y == 0.0 && raw.x == liquidation_value(impact, s, Scheme::raw()) &&
                        fee.x == raw.x - 0.05 && raw.theta == 0.0;
        return ok ? std::string{} : at(s);
    });
    suite("zero_trade", [&]() -> std::string {
        const State s = random_state();
        const State a = apply_trade(impact, s, 0.0, Scheme::raw());
        return (a.x == s.x && a.y == s.y && a.p == s.p && a.theta == 0.0) ? std::string{} : at(s);
    });
    suite("homogeneity", [&]() -> std::string {
        State s = random_state();
        if (s.theta == 0.0) s.theta = T;
        const double e = uniform(-s.y, 2.0);
        const double c = uniform(0.1, 10.0);
        if (quote(impact, e, s.p, s.theta).is_infinite()) return {};
        const State a = apply_trade(impact, s, e, Scheme::raw());
        const State b = apply_trade(impact, {c * s.x, s.y, c * s.p, s.theta}, e, Scheme::raw());
        const double tol = 1e-12 * std::max(1.0, std::abs(c * a.x));
        const bool ok = std::abs(b.x - c * a.x) <= tol && b.y == a.y &&
                        std::abs(b.p - c * a.p) <= 1e-12 * c * a.p;
        return ok ? std::string{} : at(s);
    });
    suite("merton_bound", [&]() -> std::string {
        const State s = random_state();
        const double L = liquidation_value(impact, s, Scheme::raw());
        if (L < 0.0) return {};
        const double t = uniform(0.0, T);
        return merton_bound(cfg.market, cfg.utility, t, s) >= utility(cfg.utility, L) ? std::string{} : at(s);
    });
    suite("boundary_sale", [&]() -> std::string {
        // on the liquidation boundary with e f(e, theta) increasing over [-y, 0]
        const double th = uniform(std::min(0.05, T), T);
        const double y = uniform(0.01, 1.0) * impact.sale_peak(th);
        const double p = uniform(0.2, 5.0);
        const State s{-(y * (p * impact.impact(-y, th).value())), y, p, th};
        const auto iv = admissible_trades(impact, s, Scheme::raw());
        const double tol = 1e-9 * std::max(1.0, y);
        const bool ok = iv && std::abs(iv->lo + y) <= tol && std::abs(iv->hi + y) <= tol &&
                        in_solvency(impact, s, Scheme::raw()) == Membership::BoundaryL;
        return ok ? std::string{} : at(s);
    });
    return out;
}

int cmd_check(const std::optional<fs::path>& config, CommandIO io) {
    return guarded(io, [&] {
        SolveConfig cfg = config ? load_config(*config) : default_config();
        validate(cfg);
        const std::vector<SuiteResult> results = run_invariant_suites(cfg, 10000, 12345);
        std::size_t failures = 0;
        for (const SuiteResult& r : results) {
            io.out << (r.failures == 0 ? "PASS " : "FAIL ") << r.name << " (" << r.samples << " samples";
            if (r.failures > 0) io.out << ", " << r.failures << " failures, first: " << r.first_failure;
            io.out << ")\n";
            failures += r.failures;
        }
        return failures == 0 ? int(kExitOk) : int(kExitInvariant);
    });
}

} // namespace liq
