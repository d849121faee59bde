#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A structural assumption on the coefficient (bounds, periodicity, decay) failed.
class AssumptionViolated : public Error {
public:
    explicit AssumptionViolated(std::vector<std::string> details);
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    std::vector<std::string> details_;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The flux-constant bracket [min F, max F] did not change sign under quadrature.
class BracketFailure : public Error {
public:
    BracketFailure(double lo, double g_lo, double hi, double g_hi);
};

class NoConvergence : public Error {
public:
    NoConvergence(std::string stage, int iterations, double residual);
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class MissingCorrector : public Error {
public:
    using Error::Error;
};

/// Collects every violation found while reading a configuration.
class ConfigError : public Error {
public:
    using Violation = std::pair<std::string, std::string>;  // (field, reason)

    explicit ConfigError(std::vector<Violation> violations);
    ConfigError(std::string field, std::string reason);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

}  // namespace phom
