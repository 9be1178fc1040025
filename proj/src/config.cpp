#include "liq/config.hpp"

#include "liq/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace liq {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view v, const std::string& key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
    return out;
}

template <class Int>
Int to_int(std::string_view v, const std::string& key) {
    Int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
    return out;
}

struct Key {
    const char* name;
    std::function<std::string(const SolveConfig&)> get;
    std::function<void(SolveConfig&, std::string_view, const std::string&)> set;
};


template <class Block, class Field>
Key number_key(const char* name, Block SolveConfig::*block, Field Block::*field) {
    return {name,
            [=](const SolveConfig& c) {
                if constexpr (std::is_floating_point_v<Field>) return format_double(c.*block.*field);
                else return std::to_string(c.*block.*field);
            },
            [=](SolveConfig& c, std::string_view v, const std::string& key) {
                if constexpr (std::is_floating_point_v<Field>) c.*block.*field = to_double(v, key);
                else c.*block.*field = to_int<Field>(v, key);
            }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back(number_key("market.b", &SolveConfig::market, &MarketParams::b));
        k.push_back(number_key("market.sigma", &SolveConfig::market, &MarketParams::sigma));
        k.push_back(number_key("market.T", &SolveConfig::market, &MarketParams::horizon));
        k.push_back(number_key("utility.K", &SolveConfig::utility, &UtilityParams::K));
        k.push_back(number_key("utility.gamma", &SolveConfig::utility, &UtilityParams::gamma));
        k.push_back(number_key("impact.kappa_a", &SolveConfig::impact, &ImpactParams::kappa_a));
        k.push_back(number_key("impact.kappa_b", &SolveConfig::impact, &ImpactParams::kappa_b));
        k.push_back(number_key("impact.lambda", &SolveConfig::impact, &ImpactParams::lambda));
        k.push_back(number_key("impact.beta", &SolveConfig::impact, &ImpactParams::beta));
        k.push_back({"scheme.variant",
                     [](const SolveConfig& c) { return std::string(to_string(c.scheme.kind)); },
                     [](SolveConfig& c, std::string_view v, const std::string&) {
                         c.scheme.kind = parse_scheme_kind(v);
                     }});
        k.push_back(number_key("scheme.epsilon", &SolveConfig::scheme, &Scheme::epsilon));
        k.push_back(number_key("grid.nt", &SolveConfig::grid, &GridParams::nt));
        k.push_back(number_key("grid.x_min", &SolveConfig::grid, &GridParams::x_min));
        k.push_back(number_key("grid.x_max", &SolveConfig::grid, &GridParams::x_max));
        k.push_back(number_key("grid.x_count", &SolveConfig::grid, &GridParams::x_count));
        k.push_back(number_key("grid.x_cluster", &SolveConfig::grid, &GridParams::x_cluster));
        k.push_back(number_key("grid.y_max", &SolveConfig::grid, &GridParams::y_max));
        k.push_back(number_key("grid.y_count", &SolveConfig::grid, &GridParams::y_count));
        k.push_back(number_key("grid.p_min", &SolveConfig::grid, &GridParams::p_min));
        k.push_back(number_key("grid.p_max", &SolveConfig::grid, &GridParams::p_max));
        k.push_back(number_key("grid.p_count", &SolveConfig::grid, &GridParams::p_count));
        k.push_back(number_key("grid.quadrature", &SolveConfig::grid, &GridParams::quadrature));
        k.push_back(number_key("initial.x0", &SolveConfig::initial, &InitialState::x0));
        k.push_back(number_key("initial.y0", &SolveConfig::initial, &InitialState::y0));
        k.push_back(number_key("initial.p0", &SolveConfig::initial, &InitialState::p0));
        k.push_back(number_key("initial.theta0", &SolveConfig::initial, &InitialState::theta0));
        k.push_back(number_key("initial.t0", &SolveConfig::initial, &InitialState::t0));
        k.push_back(number_key("mc.n_paths", &SolveConfig::mc, &McParams::n_paths));
        k.push_back(number_key("mc.seed", &SolveConfig::mc, &McParams::seed));
        return k;
    }();
    return table;
}

SolveConfig from_pairs(const std::map<std::string, std::string>& pairs) {
    SolveConfig cfg;
    cfg.grid.x_min = cfg.grid.x_max = cfg.grid.p_min = cfg.grid.p_max = 0.0;
    std::map<std::string, const Key*> index;
    for (const Key& k : keys()) index[k.name] = &k;
    for (const auto& [name, value] : pairs) {
        const auto it = index.find(name);
        if (it == index.end()) throw ConfigError(name, "unknown key");
        it->second->set(cfg, value, name);
    }
    if (!pairs.count("scheme.epsilon")) cfg.scheme.epsilon = cfg.scheme.kind == SchemeKind::Raw ? 0.0 : 0.05;
    resolve_grid_defaults(cfg, pairs.count("grid.x_min") > 0, pairs.count("grid.x_max") > 0,
                          pairs.count("grid.p_min") > 0, pairs.count("grid.p_max") > 0);
    return cfg;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SolveConfig parse_config(std::string_view text) {
    std::map<std::string, std::string> pairs;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty())
            throw ConfigError(key, "line " + std::to_string(line_no) + ": empty key or value");
        if (!pairs.emplace(key, value).second)
            throw ConfigError(key, "line " + std::to_string(line_no) + ": duplicate key");
    }
    return from_pairs(pairs);
}

SolveConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const SolveConfig& cfg) {
    std::string out;
    for (const Key& k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
    return out;
}

nlohmann::json config_to_json(const SolveConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const Key& k : keys()) j[k.name] = k.get(cfg);
    return j;
}

SolveConfig config_from_json(const nlohmann::json& j) {
    std::map<std::string, std::string> pairs;
    for (const auto& [name, value] : j.items()) {
        if (!value.is_string()) throw ConfigError(name, "manifest values must be strings");
        pairs[name] = value.get<std::string>();
    }
    return from_pairs(pairs);
}

std::vector<double> parse_number_list(std::string_view text, const std::string& field) {
    std::vector<double> out;
    while (true) {
        const auto comma = text.find(',');
        const std::string_view item = trim(text.substr(0, comma));
        if (item.empty()) throw ConfigError(field, "empty entry in list");
        out.push_back(to_double(item, field));
        if (comma == std::string_view::npos) break;
        text = text.substr(comma + 1);
    }
    return out;
}

} // namespace liq
