#pragma once

#include "liq/grid.hpp"
#include "liq/market_state.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace liq {

/// Discrete value function on a GridSpec, values in C-order (k, ix, iy, ip, j).
struct ValueField {
    GridSpec grid;
    Scheme scheme;
    UtilityParams utility;
    std::vector<double> values;

    double& at(std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) {
        return values[k * grid.layer_size() + grid.node(ix, iy, ip, j)];
    }
    double at(std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) const {
        return values[k * grid.layer_size() + grid.node(ix, iy, ip, j)];
    }
    const double* layer(std::size_t k) const { return values.data() + k * grid.layer_size(); }
    double* layer(std::size_t k) { return values.data() + k * grid.layer_size(); }
};

/// Argmax of the dynamic programming step per node: the post-trade share
/// index, or kContinue.
struct Policy {
    static constexpr std::int16_t kContinue = -1;

    GridSpec grid;
    std::vector<std::int16_t> target;

    /// Trade size at a node; 0 means Continue.
    double trade(std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) const;
};

/// Multilinear interpolation in (x, log p, theta) on layer k with y snapped to
/// the nearest share level. Share level 0 returns U(x) exactly (0 for x < 0).
/// Throws ExtrapolationError outside the grid hull.
double value_at_layer(const ValueField& field, std::size_t k, const State& s);

/// value_at_layer on the bracketing layers, linear in t between them.
double value_at(const ValueField& field, double t, const State& s);

void write_value_field(const std::filesystem::path& path, const ValueField& field);
ValueField read_value_field(const std::filesystem::path& path, const UtilityParams& utility);

void write_policy(const std::filesystem::path& path, const Policy& policy, const Scheme& scheme);

/// Reads the trade sizes stored by write_policy, in C-order.
std::vector<double> read_policy_trades(const std::filesystem::path& path, GridSpec* grid = nullptr);

} // namespace liq
