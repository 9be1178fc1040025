#include "liq/value_field.hpp"

#include "liq/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace liq {

static_assert(std::endian::native == std::endian::little,
              "binary artifacts are written in host order, which must be little-endian");

namespace {

constexpr char kValueMagic[5] = {'L', 'Q', 'V', 'F', '1'};
constexpr char kPolicyMagic[5] = {'L', 'Q', 'P', 'L', '1'};

struct Bracket {
    std::size_t i;
    double w;
};

Bracket locate(const std::vector<double>& axis, double v, const char* what) {
    const double lo = axis.front();
    const double hi = axis.back();
    const double tol = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (!(v >= lo - tol && v <= hi + tol)) {
        throw ExtrapolationError(std::string("value_at: ") + what + " = " + std::to_string(v) +
                                 " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    v = std::clamp(v, lo, hi);
    if (axis.size() == 1) return {0, 0.0};
    const std::size_t i = bracket(axis, v);
    return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
}

Bracket locate_log(const std::vector<double>& axis, double v) {
    const double lo = axis.front();
    const double hi = axis.back();
    if (!(v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12))) {
        throw ExtrapolationError("value_at: p = " + std::to_string(v) + " outside [" +
                                 std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    v = std::clamp(v, lo, hi);
    const std::size_t i = bracket(axis, v);
    return {i, std::log(v / axis[i]) / std::log(axis[i + 1] / axis[i])};
}

std::size_t nearest(const std::vector<double>& axis, double v) {
    const double tol = axis.size() > 1 ? 0.5 * (axis[1] - axis[0]) : 1e-12;
    if (!(v >= -1e-12 && v <= axis.back() + tol)) {
        throw ExtrapolationError("value_at: y = " + std::to_string(v) + " outside the share axis");
    }
    const auto it = std::lower_bound(axis.begin(), axis.end(), v);
    if (it == axis.begin()) return 0;
    if (it == axis.end()) return axis.size() - 1;
    const std::size_t i = static_cast<std::size_t>(it - axis.begin());
    return (v - axis[i - 1] <= axis[i] - v) ? i - 1 : i;
}

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("truncated artifact file");
    return v;
}

void put_axis(std::ostream& os, const std::vector<double>& a) {
    os.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
}

std::vector<double> get_axis(std::istream& is, std::size_t n) {
    std::vector<double> a(n);
    is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("truncated artifact file");
    return a;
}

std::uint32_t scheme_tag(SchemeKind k) {
    switch (k) {
    case SchemeKind::Raw: return 0;
    case SchemeKind::FixedFee: return 1;
    case SchemeKind::UtilityPenalty: return 2;
    }
    return 0;
}

SchemeKind scheme_from_tag(std::uint32_t tag) {
    switch (tag) {
    case 0: return SchemeKind::Raw;
    case 1: return SchemeKind::FixedFee;
    case 2: return SchemeKind::UtilityPenalty;
    default: throw std::runtime_error("artifact file: unknown scheme tag");
    }
}

void write_header(std::ostream& os, const char (&magic)[5], const GridSpec& g, const Scheme& s) {
    os.write(magic, 5);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.t.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.nx()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.ny()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.np()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.ntheta()));
    put_axis(os, g.t);
    put_axis(os, g.x);
    put_axis(os, g.y);
    put_axis(os, g.p);
    put_axis(os, g.theta);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.quadrature));
    put<double>(os, g.dt);
    put<std::uint32_t>(os, scheme_tag(s.kind));
    put<double>(os, s.epsilon);
}

void read_header(std::istream& is, const char (&magic)[5], GridSpec& g, Scheme& s) {
    char m[5];
    is.read(m, 5);
    if (!is || std::memcmp(m, magic, 5) != 0) throw std::runtime_error("artifact file: bad magic");
    const auto nk = get<std::uint32_t>(is);
    const auto nx = get<std::uint32_t>(is);
    const auto ny = get<std::uint32_t>(is);
    const auto np = get<std::uint32_t>(is);
    const auto nth = get<std::uint32_t>(is);
    if (nk < 2) throw std::runtime_error("artifact file: need at least two time levels");
    g.t = get_axis(is, nk);
    g.x = get_axis(is, nx);
    g.y = get_axis(is, ny);
    g.p = get_axis(is, np);
    g.theta = get_axis(is, nth);
    g.nt = static_cast<int>(nk) - 1;
    g.quadrature = static_cast<int>(get<std::uint32_t>(is));
    g.dt = get<double>(is);
    s.kind = scheme_from_tag(get<std::uint32_t>(is));
    s.epsilon = get<double>(is);
}

} // namespace

double Policy::trade(std::size_t k, std::size_t ix, std::size_t iy, std::size_t ip, std::size_t j) const {
    const std::int16_t to = target[k * grid.layer_size() + grid.node(ix, iy, ip, j)];
    if (to == kContinue) return 0.0;
    return grid.y[static_cast<std::size_t>(to)] - grid.y[iy];
}

double value_at_layer(const ValueField& field, std::size_t k, const State& s) {
    const GridSpec& g = field.grid;
    const std::size_t iy = nearest(g.y, s.y);
    const Bracket bx = locate(g.x, s.x, "x");
    const Bracket bp = locate_log(g.p, s.p);
    const Bracket bt = locate(g.theta, s.theta, "theta");
    if (g.y[iy] == 0.0) return s.x > 0.0 ? utility(field.utility, s.x) : 0.0;

    const double* layer = field.layer(k);
    const std::size_t ix1 = std::min(bx.i + 1, g.nx() - 1);
    const std::size_t ip1 = std::min(bp.i + 1, g.np() - 1);
    const std::size_t j1 = std::min(bt.i + 1, g.ntheta() - 1);
    auto along_theta = [&](std::size_t ix, std::size_t ip) {
        const double a = layer[g.node(ix, iy, ip, bt.i)];
        const double b = layer[g.node(ix, iy, ip, j1)];
        return a + bt.w * (b - a);
    };
    auto along_p = [&](std::size_t ix) {
        const double a = along_theta(ix, bp.i);
        const double b = along_theta(ix, ip1);
        return a + bp.w * (b - a);
    };
    const double a = along_p(bx.i);
    const double b = along_p(ix1);
    return a + bx.w * (b - a);
}

double value_at(const ValueField& field, double t, const State& s) {
    const GridSpec& g = field.grid;
    const Bracket bt = locate(g.t, t, "t");
    const double a = value_at_layer(field, bt.i, s);
    if (bt.w == 0.0) return a;
    const double b = value_at_layer(field, bt.i + 1, s);
    return a + bt.w * (b - a);
}

void write_value_field(const std::filesystem::path& path, const ValueField& field) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(os, kValueMagic, field.grid, field.scheme);
    put_axis(os, field.values);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

ValueField read_value_field(const std::filesystem::path& path, const UtilityParams& utility) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    ValueField f;
    read_header(is, kValueMagic, f.grid, f.scheme);
    f.utility = utility;
    f.values = get_axis(is, f.grid.total_size());
    return f;
}

void write_policy(const std::filesystem::path& path, const Policy& policy, const Scheme& scheme) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const GridSpec& g = policy.grid;
    write_header(os, kPolicyMagic, g, scheme);
    for (std::size_t k = 0; k < g.t.size(); ++k) {
        for (std::size_t ix = 0; ix < g.nx(); ++ix)
            for (std::size_t iy = 0; iy < g.ny(); ++iy)
                for (std::size_t ip = 0; ip < g.np(); ++ip)
                    for (std::size_t j = 0; j < g.ntheta(); ++j) put<double>(os, policy.trade(k, ix, iy, ip, j));
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> read_policy_trades(const std::filesystem::path& path, GridSpec* grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    GridSpec g;
    Scheme s;
    read_header(is, kPolicyMagic, g, s);
    std::vector<double> trades = get_axis(is, g.total_size());
    if (grid) *grid = std::move(g);
    return trades;
}

} // namespace liq
