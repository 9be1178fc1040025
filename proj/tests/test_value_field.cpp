#include <catch_amalgamated.hpp>

#include "small_config.hpp"

#include "liq/errors.hpp"
#include "liq/qvi_solver.hpp"
#include "liq/value_field.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace liq;
using liq::testing::small_config;

namespace {

const QviSolver::Result& solved() {
    static const QviSolver::Result r = backward_solve(small_config());
    return r;
}

std::filesystem::path scratch(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "liq_test_value_field";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("value_at reproduces stored values at nodes") {
    const ValueField& f = solved().field;
    const GridSpec& g = f.grid;
    for (std::size_t k : {std::size_t{0}, std::size_t{3}, static_cast<std::size_t>(g.nt)})
        for (std::size_t ix = 0; ix < g.nx(); ix += 3)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ip += 4)
                    for (std::size_t j = 0; j < g.ntheta(); j += 2) {
                        const State s{g.x[ix], g.y[iy], g.p[ip], g.theta[j]};
                        REQUIRE(value_at(f, g.t[k], s) == f.at(k, ix, iy, ip, j));
                    }
}

TEST_CASE("value_at on zero shares is the utility of cash") {
    const ValueField& f = solved().field;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.0, f.grid.x.back()), ut(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = ux(rng);
        const double v = value_at(f, ut(rng), {x, 0.0, 1.0, 0.3});
        REQUIRE(std::abs(v - utility(f.utility, x)) <= 1e-12);
    }
    CHECK(value_at(f, 0.5, {-0.1, 0.0, 1.0, 0.3}) == 0.0);
}

TEST_CASE("value_at rejects states outside the grid hull") {
    const ValueField& f = solved().field;
    const GridSpec& g = f.grid;
    CHECK_THROWS_AS(value_at(f, 0.0, {g.x.back() + 1.0, 1.0, 1.0, 0.5}), ExtrapolationError);
    CHECK_THROWS_AS(value_at(f, 0.0, {0.0, 1.0, g.p.back() * 1.01, 0.5}), ExtrapolationError);
    CHECK_THROWS_AS(value_at(f, 0.0, {0.0, 1.0, 1.0, 1.5}), ExtrapolationError);
    CHECK_THROWS_AS(value_at(f, 0.0, {0.0, g.y.back() + 1.0, 1.0, 0.5}), ExtrapolationError);
    CHECK_THROWS_AS(value_at(f, 1.5, {0.0, 1.0, 1.0, 0.5}), ExtrapolationError);
}

TEST_CASE("value_at is nondecreasing in cash along probe lines") {
    const ValueField& f = solved().field;
    const GridSpec& g = f.grid;
    for (double y : {0.5, 1.0, 2.0})
        for (double p : {0.5, 1.0, 2.0})
            for (double t : {0.0, 0.4, 1.0}) {
                double prev = -1e300;
                for (int i = 0; i <= 400; ++i) {
                    const double x = g.x.front() + (g.x.back() - g.x.front()) * i / 400.0;
                    const double v = value_at(f, t, {x, y, p, 0.5});
                    REQUIRE(v >= prev - 1e-14);
                    prev = v;
                }
            }
}

TEST_CASE("value field and policy survive a write/read round trip") {
    const auto& r = solved();
    const auto vpath = scratch("value_field.bin");
    const auto ppath = scratch("policy.bin");
    write_value_field(vpath, r.field);
    const ValueField back = read_value_field(vpath, r.field.utility);
    CHECK(back.grid == r.field.grid);
    CHECK(back.scheme == r.field.scheme);
    CHECK(back.values == r.field.values);

    write_policy(ppath, r.policy, r.field.scheme);
    GridSpec pg;
    const std::vector<double> trades = read_policy_trades(ppath, &pg);
    CHECK(pg == r.policy.grid);
    const GridSpec& g = r.policy.grid;
    REQUIRE(trades.size() == g.total_size());
    std::size_t n = 0;
    for (std::size_t k = 0; k < g.t.size(); ++k)
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j)
                        REQUIRE(trades[n++] == r.policy.trade(k, ix, iy, ip, j));
}

TEST_CASE("reading a truncated or foreign file fails cleanly") {
    const auto path = scratch("garbage.bin");
    {
        std::ofstream os(path, std::ios::binary);
        os << "not a value field";
    }
    CHECK_THROWS(read_value_field(path, UtilityParams{}));
    CHECK_THROWS(read_policy_trades(path));
    CHECK_THROWS(read_value_field(scratch("missing.bin"), UtilityParams{}));
}
