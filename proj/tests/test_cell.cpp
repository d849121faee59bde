#include "phom/cell.hpp"
#include "phom/oned.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace phom;

namespace {

CellOptions grid(int n)
{
    CellOptions o;
    o.n = n;
    return o;
}

}  // namespace

TEST_CASE("1D cell corrector matches the closed form")
{
    const auto a = PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0);
    const double a_star = oracle::reference_a_star();
    for (double xi : {1.0, -0.6}) {
        const auto s = solve_cell(make_vec({xi}), a, 3.0, grid(256));
        double err = 0.0;
        for (std::size_t c = 0; c < s.corrected.size(); ++c) {
            const double y = s.field.grid.lattice().sample_point(c)[0];
            const double exact = xi * std::sqrt(a_star / oracle::reference_a_per(y));
            err += std::pow(std::abs(s.corrected[c][0] - exact), 3.0) * s.field.grid.cell_volume();
        }
        CHECK(std::cbrt(err) <= 1e-3 * std::abs(xi));
        CHECK(std::abs(s.field.mean()) < 1e-12);
        CHECK(s.homogenized_flux()[0] ==
              doctest::Approx(a_star * xi * std::abs(xi)).epsilon(1e-3));
    }
}

TEST_CASE("energy trace never increases")
{
    const auto a = PeriodicCoefficient::cosine(2, 2.0, 1.0, 4.0);
    const auto s = solve_cell(make_vec({1.0, 0.3}), a, 4.0, grid(24));
    for (std::size_t k = 1; k < s.energy_trace.size(); ++k)
        CHECK(s.energy_trace[k] <= s.energy_trace[k - 1] * (1 + 1e-13) + 1e-300);
    CHECK(s.energy == doctest::Approx(discrete_energy(s.xi, s.field, a, 4.0)).epsilon(1e-12));
}

TEST_CASE("constant coefficient gives a zero corrector in 2D")
{
    const auto a = PeriodicCoefficient::constant(2, 1.5, 2.0);
    const Vec xi = make_vec({0.8, -1.1});
    const auto s = solve_cell(xi, a, 3.0, grid(16));
    CHECK(s.field.values.cwiseAbs().maxCoeff() < 1e-14);
    const Vec flux = s.homogenized_flux();
    const Vec exact = 1.5 * xi.norm() * xi;
    CHECK((flux - exact).norm() < 1e-13);
}

TEST_CASE("homogeneity and the scaling of the homogenized flux")
{
    const auto a = PeriodicCoefficient::cosine(2, 2.0, 1.0, 4.0);
    const double p = 3.0;
    const Vec xi = make_vec({0.7, 0.4});
    const auto base = solve_cell(xi, a, p, grid(24));
    for (double t : {-2.0, 0.5, 3.0}) {
        const auto st = solve_cell(t * xi, a, p, grid(24));
        double num = 0.0, den = 0.0;
        for (std::size_t c = 0; c < st.corrected.size(); ++c) {
            num += std::pow((st.corrected[c] - t * base.corrected[c]).norm(), p);
            den += std::pow(std::abs(t) * xi.norm(), p);
        }
        CHECK(std::pow(num / den, 1.0 / p) <= 10 * 1e-9);
        const Vec f = st.homogenized_flux();
        const Vec expect = std::pow(std::abs(t), p - 2) * t * base.homogenized_flux();
        CHECK((f - expect).norm() <= 1e-6 * expect.norm());
    }
}

TEST_CASE("homogenized flux is monotone")
{
    const auto a = PeriodicCoefficient::product_cosine(2, 2.0, 0.8, 4.0);
    const std::vector<Vec> xs{make_vec({1.0, 0.0}), make_vec({0.3, -0.8}), make_vec({-0.5, 0.6}),
                              make_vec({1.2, 1.1})};
    const auto op = homogenized_operator(xs, a, 3.0, grid(16), 1);
    REQUIRE(op.entries.size() == xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const auto& [xi, fi] = op.entries[i];
            const auto& [eta, fj] = op.entries[j];
            const double scale = (fi.norm() + fj.norm()) * (xi - eta).norm();
            CHECK((fi - fj).dot(xi - eta) >= -1e-10 * scale);
        }
}

TEST_CASE("1D operator reads off the closed form")
{
    const auto a = PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0);
    const auto op = homogenized_operator({make_vec({1.0})}, a, 3.0, grid(256), 1);
    REQUIRE(op.scalar_1d);
    REQUIRE(op.closed_form_1d);
    CHECK(*op.closed_form_1d == doctest::Approx(oracle::reference_a_star()).epsilon(1e-12));
    CHECK(*op.scalar_1d == doctest::Approx(*op.closed_form_1d).epsilon(1e-3));
}

TEST_CASE("laminate lower bound on the corrected gradient")
{
    const double p = 3.0;
    const auto lam = PeriodicCoefficient::laminate(2, 2.0, 1.0, 4.0);
    const auto e2 = check_gradient_bound(lam, p, {make_vec({0.0, 1.0})}, 0.0, grid(32), 1);
    CHECK(e2.c_est == doctest::Approx(1.0).epsilon(1e-12));
    // xi = e_1 reduces to the 1D problem in y_1: |xi + grad w| = (a*/a_0)^{1/(p-1)}
    const double a0_star = oracle::a_star([](double y) { return 2.0 + std::cos(2 * oracle::pi * y); }, p);
    const double closed = std::sqrt(a0_star / 3.0);
    const auto e1 = check_gradient_bound(lam, p, {make_vec({1.0, 0.0})}, 0.0, grid(64), 1);
    CHECK(e1.c_est > 0.0);
    CHECK(e1.c_est == doctest::Approx(closed).epsilon(1e-6));
    CHECK(check_gradient_bound(PeriodicCoefficient::constant(2, 1.0, 2.0), p, {make_vec({0.3, 0.2})}, 0.5,
                   grid(8), 1)
              .c_est == doctest::Approx(1.0));
}

TEST_CASE("continuity exponent estimate lies in (0, 1]")
{
    const auto a = PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0);
    const double g = estimate_gamma(a, 3.0, make_vec({1.0}), grid(128));
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
}

TEST_CASE("grid defaults")
{
    CHECK(default_cell_grid(1) == 256);
    CHECK(default_cell_grid(2) == 64);
    const PeriodicGrid g(2, 8);
    CHECK(g.num_nodes() == 64);
    CHECK(g.cell_volume() == doctest::Approx(1.0 / 64));
}
