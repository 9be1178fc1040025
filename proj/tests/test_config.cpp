#include <catch_amalgamated.hpp>

#include "liq/config.hpp"
#include "liq/errors.hpp"

#include <cmath>
#include <filesystem>

using namespace liq;

namespace {

std::string error_field(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

} // namespace

TEST_CASE("the shipped config is the default configuration") {
    const SolveConfig cfg = load_config(std::filesystem::path(LIQ_SOURCE_DIR) / "configs/default.conf");
    CHECK(cfg == default_config());
    CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("an empty config resolves the derived grid ranges") {
    const SolveConfig cfg = parse_config("# nothing set\n\n");
    CHECK(cfg == default_config());
    const double spread = 5.0 * 0.3;
    CHECK(cfg.grid.p_min == std::exp(-spread));
    CHECK(cfg.grid.p_max == std::exp(spread));
    CHECK(cfg.grid.x_min == -2.0 * std::exp(spread));
    CHECK(cfg.grid.x_max == 2.0 * std::exp(spread));
    CHECK(cfg.scheme == Scheme::fixed_fee(0.05));
}

TEST_CASE("derived ranges follow the values they depend on") {
    const SolveConfig cfg = parse_config("initial.p0 = 2\ninitial.x0 = 1.5\ngrid.y_max = 3\nmarket.sigma = 0.2\n");
    CHECK(cfg.grid.p_min == 2.0 * std::exp(-1.0));
    CHECK(cfg.grid.p_max == 2.0 * std::exp(1.0));
    CHECK(cfg.grid.x_min == -3.0 * cfg.grid.p_max);
    CHECK(cfg.grid.x_max == 1.5 + 3.0 * cfg.grid.p_max);
    const SolveConfig fixed = parse_config("grid.x_min = -1\ngrid.p_max = 9\n");
    CHECK(fixed.grid.x_min == -1.0);
    CHECK(fixed.grid.p_max == 9.0);
    CHECK(fixed.grid.x_max == 2.0 * 9.0);
}

TEST_CASE("scheme epsilon defaults by variant") {
    CHECK(parse_config("scheme.variant = raw\n").scheme == Scheme::raw());
    CHECK(parse_config("scheme.variant = penalty\n").scheme == Scheme::utility_penalty(0.05));
    CHECK(parse_config("scheme.variant = fee\nscheme.epsilon = 0.2\n").scheme == Scheme::fixed_fee(0.2));
}

TEST_CASE("serialised configs parse back to the same value") {
    SolveConfig cfg = default_config();
    cfg.market.b = 0.1 + 0.2;
    cfg.impact.lambda = 1.0 / 3.0;
    cfg.scheme = Scheme::utility_penalty(0.0123456789);
    cfg.grid.nt = 17;
    cfg.initial.theta0 = std::nextafter(0.5, 1.0);
    cfg.mc.seed = 0xFFFFFFFFFFFFFFFFull;
    CHECK(parse_config(serialize_config(cfg)) == cfg);
    CHECK(config_from_json(config_to_json(cfg)) == cfg);
    CHECK(config_from_json(nlohmann::json::parse(config_to_json(cfg).dump())) == cfg);
}

TEST_CASE("config errors name the offending key") {
    CHECK(error_field("market.drift = 1\n") == "market.drift");
    CHECK(error_field("market.b = 1\nmarket.b = 2\n") == "market.b");
    CHECK(error_field("grid.nt = 2.5\n") == "grid.nt");
    CHECK(error_field("utility.gamma = half\n") == "utility.gamma");
    CHECK(error_field("scheme.variant = both\n") == "scheme.variant");
    CHECK(error_field("impact.beta =\n") == "impact.beta");
    CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"market.b", 0.1}}), ConfigError);
}

TEST_CASE("validation rejects inconsistent configurations") {
    auto field_of = [](SolveConfig cfg) -> std::string {
        try {
            validate(cfg);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return "<valid>";
    };
    SolveConfig c = default_config();
    c.utility.gamma = 1.0;
    CHECK(field_of(c) == "utility.gamma");
    c = default_config();
    c.scheme = Scheme{SchemeKind::Raw, 0.1};
    CHECK(field_of(c) == "scheme.epsilon");
    c = default_config();
    c.initial.t0 = 1.0;
    CHECK(field_of(c) == "initial.t0");
    c = default_config();
    c.initial.theta0 = 1.0; // any lag up to the horizon is allowed
    CHECK(field_of(c) == "<valid>");
    c = default_config();
    c.initial.p0 = 100.0;
    CHECK(field_of(c) == "initial.p0");
    c = default_config();
    c.impact.lambda = 0.0;
    CHECK(field_of(c) == "impact.lambda");
    c = default_config();
    c.impact.kappa_b = 1.1; // left to the assumption check
    CHECK(field_of(c) == "<valid>");
    c = default_config();
    c.mc.n_paths = 1;
    CHECK(field_of(c) == "mc.n_paths");
}

TEST_CASE("number lists") {
    CHECK(parse_number_list("0.2,0.1, 0.05", "epsilons") == std::vector<double>{0.2, 0.1, 0.05});
    CHECK(parse_number_list("1.5", "thetas") == std::vector<double>{1.5});
    CHECK_THROWS_AS(parse_number_list("0.2,,0.1", "epsilons"), ConfigError);
    CHECK_THROWS_AS(parse_number_list("0.2,x", "epsilons"), ConfigError);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_double(v)) == v);
}
