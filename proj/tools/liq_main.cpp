#include "liq/commands.hpp"
#include "liq/config.hpp"
#include "liq/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Optimal portfolio liquidation under temporary impact: solver and Monte Carlo lab"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::optional<std::int64_t> paths;
    std::optional<std::uint64_t> seed;
    std::string epsilons = "0.2,0.1,0.05";
    std::string thetas = "1.5,0.5,0.1,0.01";
    double p = 1.0;

    auto* solve = app.add_subcommand("solve", "backward induction; writes value field, policy, manifest");
    solve->add_option("--config", config, "config file")->required();
    solve->add_option("--out", out, "output directory")->required();

    auto* simulate = app.add_subcommand("simulate", "run the stored policy and baselines on simulated paths");
    simulate->add_option("--config", config, "directory written by solve")->required();
    simulate->add_option("--out", out, "output directory (default: the solve directory)");
    simulate->add_option("--paths", paths, "number of paths (default: mc.n_paths)");
    simulate->add_option("--seed", seed, "seed (default: mc.seed)");

    auto* sweep = app.add_subcommand("sweep", "solve for decreasing epsilons and compare nodewise");
    sweep->add_option("--config", config, "config file")->required();
    sweep->add_option("--out", out, "output directory")->required();
    sweep->add_option("--epsilons", epsilons, "comma-separated, strictly decreasing");

    auto* region = app.add_subcommand("region", "solvency region boundary curves as CSV");
    region->add_option("--config", config, "config file (impact and scheme)");
    region->add_option("--out", out, "CSV file (default: stdout)");
    region->add_option("--thetas", thetas, "comma-separated lags");
    region->add_option("--p", p, "price");

    auto* check = app.add_subcommand("check", "randomised invariant suites");
    check->add_option("--config", config, "config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : liq::kExitValidation;
    }

    liq::CommandIO io{std::cout, std::cerr};
    auto optional_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
        if (s.empty()) return std::nullopt;
        return std::filesystem::path(s);
    };

    try {
        if (*solve) return liq::cmd_solve(config, out, io);
        if (*simulate) return liq::cmd_simulate(config, paths, seed, optional_path(out), io);
        if (*sweep) return liq::cmd_sweep(config, liq::parse_number_list(epsilons, "epsilons"), out, io);
        if (*region)
            return liq::cmd_region(optional_path(config), liq::parse_number_list(thetas, "thetas"), p,
                                   optional_path(out), io);
        if (*check) return liq::cmd_check(optional_path(config), io);
    } catch (const liq::ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return liq::kExitValidation;
    }
    return liq::kExitRuntime;
}
