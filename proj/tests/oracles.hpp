#pragma once

// Reference values computed without the library, using Boost quadrature and
// root finding or the naive formulas.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

inline double sgn_pow(double z, double e)
{
    return z == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(z), e), z);
}

inline double integrate(const std::function<double(double)>& f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

/// int_{-1/2}^{1/2} (2 + cos 2 pi y)^{-1/2} dy = (2/(pi sqrt 3)) K(sqrt(2/3)), so
/// the p = 3 homogenized coefficient of 2 + cos(2 pi y) is its inverse square.
inline double reference_a_star()
{
    const double I = 2.0 / (pi * std::sqrt(3.0)) * std::comp_ellint_1(std::sqrt(2.0 / 3.0));
    return 1.0 / (I * I);
}

/// (int_Q a^{-1/(p-1)})^{-(p-1)} by adaptive quadrature.
inline double a_star(const std::function<double(double)>& a, double p)
{
    const double beta = 1.0 / (p - 1.0);
    const double I = integrate([&](double y) { return std::pow(a(y), -beta); }, -0.5, 0.5);
    return std::pow(I, -(p - 1.0));
}

inline double reference_a_per(double y) { return 2.0 + std::cos(2.0 * pi * y); }
inline double reference_a(double y) { return reference_a_per(y) + 10.0 * std::exp(-std::abs(y)); }

/// Flux constant C of u' = sp((C - F)/a(x/eps))^{1/(p-1)} on (-1/2, 1/2) with
/// F(x) = x^2 - 1/4 (f = 2x) and int u' = 0.
inline double reference_flux_constant(const std::function<double(double)>& a, double eps, double p)
{
    const double beta = 1.0 / (p - 1.0);
    auto G = [&](double C) {
        std::vector<double> br{-0.5, 0.5};
        const double r2 = C + 0.25;
        if (r2 > 0.0 && std::sqrt(r2) < 0.5) {
            br.push_back(std::sqrt(r2));
            br.push_back(-std::sqrt(r2));
        }
        // period breaks
        for (double x = std::ceil(-0.5 / eps) * eps; x < 0.5; x += eps)
            br.push_back(x);
        std::sort(br.begin(), br.end());
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            if (br[i + 1] - br[i] < 1e-15)
                continue;
            s += integrate(
                [&](double x) { return sgn_pow((C - (x * x - 0.25)) / a(x / eps), beta); }, br[i],
                br[i + 1]);
        }
        return s;
    };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        G, -0.25, 0.0, boost::math::tools::eps_tolerance<double>(45), iters);
    return 0.5 * (r.first + r.second);
}

/// |xi + x|^p - |xi|^p - p|xi|^{p-2} xi x in one dimension, straight from the definition.
inline double naive_g(double xi, double x, double p)
{
    return std::pow(std::abs(xi + x), p) - std::pow(std::abs(xi), p) -
           p * std::pow(std::abs(xi), p - 2.0) * xi * x;
}

}  // namespace oracle
