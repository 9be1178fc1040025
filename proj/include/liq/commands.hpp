#pragma once

#include "liq/solve_config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace liq {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitValidation = 2, kExitInvariant = 3 };

struct CommandIO {
    std::ostream& out;
    std::ostream& err;
};

/// Solves the configuration and writes value_field.bin, policy.bin and
/// manifest.json into `out_dir`.
int cmd_solve(const std::filesystem::path& config, const std::filesystem::path& out_dir, CommandIO io);

/// Simulates the stored policy and the baselines. Writes paths.csv and
/// summary.json into `out_dir` (defaults to the artifact directory).
int cmd_simulate(const std::filesystem::path& field_dir, std::optional<std::int64_t> n_paths,
                 std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out_dir,
                 CommandIO io);

/// Epsilon sweep with the scheme kind of the config. Writes sweep.csv,
/// sweep_runs.csv and sweep.json into `out_dir`.
int cmd_sweep(const std::filesystem::path& config, const std::vector<double>& eps,
              const std::filesystem::path& out_dir, CommandIO io);

/// Region boundary curves as CSV (theta, y, x_min, y1, y2) to `out_file`,
/// or to io.out when empty.
int cmd_region(const std::optional<std::filesystem::path>& config, const std::vector<double>& thetas,
               double p, const std::optional<std::filesystem::path>& out_file, CommandIO io);

/// Randomised invariant suites for the impact model and the market state.
int cmd_check(const std::optional<std::filesystem::path>& config, CommandIO io);

struct SuiteResult {
    std::string name;
    std::size_t samples = 0;
    std::size_t failures = 0;
    std::string first_failure;
};

/// The suites behind cmd_check, on `n` samples each drawn with `seed`.
std::vector<SuiteResult> run_invariant_suites(const SolveConfig& cfg, std::size_t n, std::uint64_t seed);

} // namespace liq
