#include "phom/errors.hpp"

#include <sstream>

namespace phom {

namespace {

std::string join_details(const std::vector<std::string>& details)
{
    std::ostringstream os;
    os << "assumption violated";
    for (const auto& d : details)
        os << "; " << d;
    return os.str();
}

std::string join_violations(const std::vector<ConfigError::Violation>& v)
{
    std::ostringstream os;
    os << "invalid configuration";
    for (const auto& [field, reason] : v)
        os << "; " << field << ": " << reason;
    return os.str();
}

}  // namespace

AssumptionViolated::AssumptionViolated(std::vector<std::string> details)
    : Error(join_details(details)), details_(std::move(details))
{
}

BracketFailure::BracketFailure(double lo, double g_lo, double hi, double g_hi)
    : Error([&] {
          std::ostringstream os;
          os << "flux constant bracket failure: G(" << lo << ") = " << g_lo << ", G(" << hi
             << ") = " << g_hi << " (quadrature too coarse?)";
          return os.str();
      }())
{
}

NoConvergence::NoConvergence(std::string stage, int iterations, double residual)
    : Error([&] {
          std::ostringstream os;
          os << stage << ": no convergence after " << iterations << " iterations (residual "
             << residual << ")";
          return os.str();
      }()),
      iterations_(iterations),
      residual_(residual)
{
}

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(join_violations(violations)), violations_(std::move(violations))
{
}

ConfigError::ConfigError(std::string field, std::string reason)
    : ConfigError(std::vector<Violation>{{std::move(field), std::move(reason)}})
{
}

}  // namespace phom
