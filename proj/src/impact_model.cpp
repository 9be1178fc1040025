#include "liq/impact_model.hpp"

#include "liq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace liq {

namespace {

std::string point_text(double e, double theta) {
    std::ostringstream os;
    os.precision(17);
    os << "(e=" << e << ", theta=" << theta << ")";
    return os.str();
}

} // namespace

void check_parameters(const ImpactParams& params) {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(field, what);
    };
    require(std::isfinite(params.kappa_a) && params.kappa_a > 0.0, "impact.kappa_a",
            "must be finite and positive");
    require(std::isfinite(params.kappa_b) && params.kappa_b > 0.0, "impact.kappa_b",
            "must be finite and positive");
    require(std::isfinite(params.lambda) && params.lambda > 0.0, "impact.lambda",
            "must be finite and positive");
    require(std::isfinite(params.beta) && params.beta > 0.0, "impact.beta",
            "must be finite and positive");
}

double ImpactValue::value() const {
    if (infinite_) throw std::logic_error("ImpactValue::value() on the infinite sentinel");
    return value_;
}

PowerImpact::PowerImpact(const ImpactParams& params) : params_(params) {
    check_parameters(params_);
}

ImpactValue PowerImpact::impact(double e, double theta) const {
    if (!(theta >= 0.0)) throw DomainError("impact: negative lag theta");
    if (e == 0.0) return ImpactValue::finite(1.0);
    if (theta == 0.0) {
        return e < 0.0 ? ImpactValue::finite(0.0) : ImpactValue::infinite();
    }
    const double speed = std::pow(std::abs(e) / theta, params_.beta);
    if (e > 0.0) {
        const double m = params_.kappa_a * std::exp(params_.lambda * speed);
        return std::isfinite(m) ? ImpactValue::finite(m) : ImpactValue::infinite();
    }
    return ImpactValue::finite(params_.kappa_b * std::exp(-params_.lambda * speed));
}

double PowerImpact::impact_dtheta(double e, double theta) const {
    if (!(e < 0.0)) throw DomainError("impact_dtheta: only defined for sales (e < 0)");
    if (!(theta > 0.0)) throw DomainError("impact_dtheta: requires theta > 0");
    const double speed = std::pow(-e / theta, params_.beta);
    const double f = params_.kappa_b * std::exp(-params_.lambda * speed);
    return f * params_.lambda * params_.beta * speed / theta;
}

double PowerImpact::sale_peak(double theta) const {
    if (!(theta >= 0.0)) throw DomainError("sale_peak: negative lag theta");
    // d/dy [y exp(-lambda (y/theta)^beta)] = 0  <=>  lambda beta (y/theta)^beta = 1
    return theta * std::pow(params_.lambda * params_.beta, -1.0 / params_.beta);
}

ImpactValue impact(const ImpactParams& params, double e, double theta) {
    return PowerImpact(params).impact(e, theta);
}

double impact_dtheta(const ImpactParams& params, double e, double theta) {
    return PowerImpact(params).impact_dtheta(e, theta);
}

AssumptionSample AssumptionSample::standard(double horizon, std::size_t n_sizes,
                                            std::size_t n_lags) {
    AssumptionSample s;
    n_sizes = std::max<std::size_t>(n_sizes | 1, 3); // odd, so 0 is on the grid
    n_lags = std::max<std::size_t>(n_lags, 2);
    for (std::size_t i = 0; i < n_sizes; ++i) {
        s.sizes.push_back(-5.0 + 10.0 * static_cast<double>(i) / static_cast<double>(n_sizes - 1));
    }
    s.sizes[n_sizes / 2] = 0.0;
    for (std::size_t j = 0; j < n_lags; ++j) {
        s.lags.push_back(horizon * static_cast<double>(j) / static_cast<double>(n_lags - 1));
    }
    return s;
}

bool AssumptionReport::failed(const std::string& check) const {
    return std::any_of(failures.begin(), failures.end(),
                       [&](const AssumptionFailure& f) { return f.check == check; });
}

AssumptionReport validate_assumptions(const ImpactModel& model, const AssumptionSample& sample) {
    AssumptionReport report;
    auto fail = [&](const char* check, double e, double theta, std::string detail) {
        report.failures.push_back({check, e, theta, std::move(detail)});
    };

    const double bid = model.bid_multiplier();
    const double ask = model.ask_multiplier();
    if (!(bid < 1.0)) {
        // f(e, theta) -> kappa_b as e -> 0-, so small enough sales show it
        const double theta = sample.lags.empty() ? 1.0 : std::max(1.0, sample.lags.back());
        double e = -theta;
        for (int k = 0; k < 60; ++k) {
            const ImpactValue f = model.impact(e, theta);
            if (f.is_finite() && f.value() >= 1.0) break;
            e *= 0.5;
        }
        fail("bid_ask", e, theta,
             "bid multiplier kappa_b = " + std::to_string(bid) + " must be < 1");
    }
    if (!(ask > 1.0)) {
        fail("bid_ask", 1.0, 0.0,
             "ask multiplier kappa_a = " + std::to_string(ask) + " must be > 1");
    }

    std::vector<double> sizes = sample.sizes;
    std::sort(sizes.begin(), sizes.end());

    for (double theta : sample.lags) {
        const ImpactValue at_zero = model.impact(0.0, theta);
        ++report.points_checked;
        if (at_zero.is_infinite() || at_zero.value() != 1.0) {
            fail("zero_trade", 0.0, theta, "f(0, theta) != 1 at " + point_text(0.0, theta));
        }

        // infinite compares above every finite multiplier
        bool have_prev = false;
        ImpactValue prev = ImpactValue::finite(0.0);
        double prev_e = 0.0;
        for (double e : sizes) {
            const ImpactValue f = model.impact(e, theta);
            ++report.points_checked;
            if (have_prev) {
                const bool decreasing =
                    prev.is_infinite() ? f.is_finite() : (f.is_finite() && f.value() < prev.value());
                if (decreasing) {
                    fail("monotone_size", e, theta,
                         "f decreases between " + point_text(prev_e, theta) + " and " +
                             point_text(e, theta));
                }
            }
            prev = f;
            prev_e = e;
            have_prev = true;

            if (theta == 0.0 && e < 0.0 && (f.is_infinite() || f.value() != 0.0)) {
                fail("zero_lag", e, theta, "immediate sale must fetch 0 at " + point_text(e, theta));
            }
            if (theta == 0.0 && e > 0.0 && f.is_finite()) {
                fail("zero_lag", e, theta,
                     "immediate purchase must be unbounded at " + point_text(e, theta));
            }
            if (e < 0.0 && f.is_finite() && (f.value() > bid || f.value() >= 1.0)) {
                fail("bid_ask", e, theta,
                     "sale multiplier " + std::to_string(f.value()) + " not below bid/1 at " +
                         point_text(e, theta));
            }
            if (e > 0.0 && theta > 0.0 && f.is_finite() && (f.value() < ask || f.value() <= 1.0)) {
                fail("bid_ask", e, theta,
                     "purchase multiplier " + std::to_string(f.value()) + " not above ask/1 at " +
                         point_text(e, theta));
            }
        }
    }
    return report;
}

} // namespace liq
