#pragma once

#include <stdexcept>
#include <string>

namespace liq {

/// Argument outside the mathematical domain of an operation (negative lag,
/// negative wealth passed to the utility, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration. `field()` carries the dotted key
/// path of the offending entry when one is known.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A trade that would leave the closed solvency region or violate the
/// no-short constraint.
class TradeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShortSaleError : public TradeError {
public:
    using TradeError::TradeError;
};

class InadmissibleTradeError : public TradeError {
public:
    using TradeError::TradeError;
};

/// Non-finite value produced by the backward induction.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Query outside the convex hull of the stored grid.
class ExtrapolationError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A property the solver or simulator is required to maintain did not hold.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace liq
