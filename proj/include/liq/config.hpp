#pragma once

#include "liq/solve_config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace liq {

/// Parses the flat `section.key = value` format (`#` starts a comment).
/// Keys left out keep their defaults; derived grid ranges are resolved from
/// the final market and initial values. Throws ConfigError naming the key.
/// Does not run validate().
SolveConfig parse_config(std::string_view text);

SolveConfig load_config(const std::filesystem::path& path);

/// Every key with full precision, in a fixed order; parse_config inverts it.
std::string serialize_config(const SolveConfig& cfg);

nlohmann::json config_to_json(const SolveConfig& cfg);
SolveConfig config_from_json(const nlohmann::json& j);

/// Comma-separated list of doubles, e.g. "0.2,0.1,0.05".
std::vector<double> parse_number_list(std::string_view text, const std::string& field);

/// printf %.17g.
std::string format_double(double v);

} // namespace liq
