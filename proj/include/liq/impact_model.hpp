#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace liq {

/// Parameters of the exponential temporary-impact family
///
///     f(e, theta) = exp(lambda * |e/theta|^beta * sgn(e)) * (kappa_a | 1 | kappa_b)
///
/// where the bracket picks kappa_a for purchases, 1 for the zero trade and
/// kappa_b for sales. kappa_a/kappa_b are the ask/bid multipliers of the
/// mid price, lambda the impact factor and beta the impact exponent.
struct ImpactParams {
    double kappa_a = 1.1;
    double kappa_b = 0.9;
    double lambda = 1.0;
    double beta = 1.0;

    friend bool operator==(const ImpactParams&, const ImpactParams&) = default;
};

/// Rejects parameters the formula cannot be evaluated with (non-finite,
/// non-positive multipliers, lambda <= 0, beta <= 0). The bid/ask ordering
/// is deliberately left to validate_assumptions so that a misconfigured
/// spread shows up in the assumption report instead of a constructor throw.
void check_parameters(const ImpactParams& params);

/// Price multiplier returned by an impact model. Purchases placed with a zero
/// lag cost an unbounded price; that case is carried as a flag so callers
/// can reject the trade without doing arithmetic on infinity.
class ImpactValue {
public:
    static constexpr ImpactValue finite(double v) noexcept { return ImpactValue(v, false); }
    static constexpr ImpactValue infinite() noexcept { return ImpactValue(0.0, true); }

    constexpr bool is_infinite() const noexcept { return infinite_; }
    constexpr bool is_finite() const noexcept { return !infinite_; }

    /// Throws std::logic_error for the infinite sentinel.
    double value() const;

    friend constexpr bool operator==(const ImpactValue&, const ImpactValue&) = default;

private:
    constexpr ImpactValue(double v, bool inf) noexcept : value_(v), infinite_(inf) {}

    double value_;
    bool infinite_;
};

/// Temporary price impact surface f(e, theta). Implementations must be pure
/// and thread-safe.
class ImpactModel {
public:
    virtual ~ImpactModel() = default;

    /// f(e, theta) for theta >= 0. Throws DomainError for theta < 0.
    virtual ImpactValue impact(double e, double theta) const = 0;

    /// d f / d theta on the sale branch (e < 0, theta > 0).
    virtual double impact_dtheta(double e, double theta) const = 0;

    /// Share count y* maximising the block-sale proceeds y * f(-y, theta).
    /// Zero when theta == 0.
    virtual double sale_peak(double theta) const = 0;

    /// Upper bound of f over sales and lower bound of f over purchases.
    virtual double bid_multiplier() const = 0;
    virtual double ask_multiplier() const = 0;
};

class PowerImpact final : public ImpactModel {
public:
    explicit PowerImpact(const ImpactParams& params);

    ImpactValue impact(double e, double theta) const override;
    double impact_dtheta(double e, double theta) const override;
    double sale_peak(double theta) const override;
    double bid_multiplier() const override { return params_.kappa_b; }
    double ask_multiplier() const override { return params_.kappa_a; }

    const ImpactParams& params() const noexcept { return params_; }

private:
    ImpactParams params_;
};

ImpactValue impact(const ImpactParams& params, double e, double theta);
double impact_dtheta(const ImpactParams& params, double e, double theta);

/// Cartesian sample of trade sizes and lags used by validate_assumptions.
struct AssumptionSample {
    std::vector<double> sizes;
    std::vector<double> lags;

    /// Sizes in [-5, 5] and lags in [0, horizon], including 0 on both axes.
    static AssumptionSample standard(double horizon, std::size_t n_sizes = 41,
                                     std::size_t n_lags = 21);
};

struct AssumptionFailure {
    std::string check;
    double e = 0.0;
    double theta = 0.0;
    std::string detail;
};

struct AssumptionReport {
    std::size_t points_checked = 0;
    std::vector<AssumptionFailure> failures;

    bool ok() const noexcept { return failures.empty(); }
    bool failed(const std::string& check) const;
};

/// Checks the standing impact assumptions on a sample grid:
///   zero_trade      f(0, theta) == 1
///   monotone_size   e -> f(e, theta) nondecreasing
///   zero_lag        f(e, 0) == 0 for sales and infinite for purchases
///   bid_ask         kappa_b < 1 < kappa_a, sales priced at most kappa_b,
///                   purchases at least kappa_a
/// Every failure carries a witness point.
AssumptionReport validate_assumptions(const ImpactModel& model, const AssumptionSample& sample);

} // namespace liq
