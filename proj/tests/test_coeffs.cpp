#include "phom/coeffs.hpp"
#include "phom/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace phom;

TEST_CASE("cosine family is periodic and bounded")
{
    for (int d : {1, 2, 3}) {
        const auto a = PeriodicCoefficient::cosine(d, 2.0, 1.0, 4.0);
        Vec y = zero_vec(d);
        CHECK(a(y) == doctest::Approx(3.0));
        for (int k = 0; k < d; ++k) {
            Vec z = y;
            z[k] += 0.37;
            Vec zs = z;
            zs[k] += 1.0;
            CHECK(a(z) == doctest::Approx(a(zs)).epsilon(1e-13));
        }
    }
    const auto lam = PeriodicCoefficient::laminate(2, 2.0, 1.0, 4.0);
    CHECK(lam(make_vec({0.2, 0.0})) == doctest::Approx(lam(make_vec({0.2, 0.41}))));
    const auto prod = PeriodicCoefficient::product_cosine(2, 2.0, 1.0, 4.0);
    CHECK(prod(make_vec({0.25, 0.0})) == doctest::Approx(2.0));
}

TEST_CASE("reference coefficient passes validation")
{
    Coefficient c(PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0),
                  DefectCoefficient::exponential(1, 10.0, 1.0), 3.0);
    CHECK(c.at(0.0) == doctest::Approx(13.0));
    CHECK(c.at(0.5) == doctest::Approx(1.0 + 10.0 * std::exp(-0.5)));
    const auto r = inspect(c, 1024);
    CHECK(r.passed());
    CHECK(r.min_a > 1.0 / 14.0);
    CHECK(r.max_a < 14.0);
    CHECK(r.periodicity_residual < 1e-12);
    // exp(-|y|) decays below 1e-6 by |y| = log(1e7)
    CHECK(c.defect()->decay_radius() >= std::log(10.0 / 1e-6) - 1e-9);
    CHECK(defect_tail_max(*c.defect(), c.defect()->decay_radius(), 40.0, 256) <= 1e-6 * (1 + 1e-9));
    // int_R (10 e^{-|y|})^{3/2} = 2 * 10^{1.5} / 1.5
    CHECK(r.defect_lp_prime_norm ==
          doctest::Approx(std::pow(2.0 * std::pow(10.0, 1.5) / 1.5, 2.0 / 3.0)).epsilon(1e-3));
    CHECK(c.periodic_only().has_defect() == false);
}

TEST_CASE("bound violations are reported and thrown")
{
    Coefficient c(PeriodicCoefficient::constant(1, 2.0, 1.5), std::nullopt, 3.0);
    const auto r = inspect(c, 64);
    CHECK_FALSE(r.passed());
    CHECK_THROWS_AS(validate(c, 64), AssumptionViolated);

    // a defect pushing a below 1/lambda
    Coefficient neg(PeriodicCoefficient::cosine(1, 2.0, 1.0, 4.0),
                    DefectCoefficient::exponential(1, -1.5, 1.0), 3.0);
    CHECK_FALSE(inspect(neg, 256).passed());
}

TEST_CASE("p below 2 and mismatched dimensions are rejected")
{
    CHECK_THROWS_AS(Coefficient(PeriodicCoefficient::constant(1, 1.0, 2.0), std::nullopt, 1.5),
                    InvalidArgument);
    CHECK_THROWS_AS(Coefficient(PeriodicCoefficient::constant(2, 1.0, 2.0),
                                DefectCoefficient::gaussian(1, 1.0, 1.0), 3.0),
                    InvalidArgument);
}

TEST_CASE("tabulated coefficient interpolates and reads from file")
{
    const auto path = std::filesystem::temp_directory_path() / "phom_test_grid.txt";
    {
        std::ofstream f(path);
        f << "1 4\n1 2 3 2\n";
    }
    const auto a = PeriodicCoefficient::read_tabulated(path.string(), 4.0);
    CHECK(a.dim() == 1);
    CHECK(a(make_vec({-0.5})) == doctest::Approx(1.0));
    CHECK(a(make_vec({-0.25})) == doctest::Approx(2.0));
    CHECK(a(make_vec({-0.375})) == doctest::Approx(1.5));
    CHECK(a(make_vec({0.5})) == doctest::Approx(1.0));
    std::filesystem::remove(path);
    CHECK_THROWS(PeriodicCoefficient::read_tabulated(path.string(), 4.0));
}
