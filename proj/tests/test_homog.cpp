#include "phom/errors.hpp"
#include "phom/homog.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace phom;

namespace {

Field scalar(std::function<double(double)> f)
{
    return [f](const Vec& x) { return make_vec({f(x[0])}); };
}

std::vector<double> dyadic(int from, int to)
{
    std::vector<double> d;
    for (int k = from; k <= to; ++k)
        d.push_back(std::ldexp(1.0, -k));
    return d;
}

std::shared_ptr<const Coefficient> reference_coefficient()
{
    return std::make_shared<const Coefficient>(PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0),
                                               DefectCoefficient::exponential(1, 10.0, 1.0), 3.0);
}

}  // namespace

TEST_CASE("single cell example")
{
    const auto m = discretize([](double x) { return x; }, 0.0, 1.0, 0.5);
    REQUIRE(m.num_cells() == 1);
    CHECK(m.value(0)[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.centre(0)[0] == doctest::Approx(0.5));
    CHECK(m.covered_measure() == doctest::Approx(0.5));
    CHECK(m(make_vec({0.6}))[0] == doctest::Approx(0.5));
    CHECK(m(make_vec({0.1}))[0] == 0.0);  // uncovered sliver
    CHECK_FALSE(m.cell_of(make_vec({0.9})).has_value());
}

TEST_CASE("cell means are exact for affine functions in 2D")
{
    const Box omega{{-0.5, -0.5}, {0.5, 0.5}};
    const Field phi = [](const Vec& x) { return make_vec({1.0 + 2 * x[0] - x[1], x[1]}); };
    const auto m = discretize(phi, omega, 0.25, 2);
    CHECK(m.num_cells() == 9);
    for (std::size_t i = 0; i < m.num_cells(); ++i)
        CHECK((m.value(i) - phi(m.centre(i))).norm() < 1e-13);
    CHECK_THROWS_AS(discretize(phi, omega, 0.0, 2), InvalidArgument);
    CHECK_THROWS_AS(discretize(phi, Box{{0, 0, 0}, {1, 1, 1}}, 0.5, 2), InvalidArgument);
}

TEST_CASE("discretization error has order one on covered cells")
{
    const auto orders = discretization_orders(scalar([](double x) { return std::sin(3 * x); }),
                                              Box::interval(0.0, 1.0), dyadic(3, 8), 2.0);
    for (std::size_t k = 1; k < orders.size(); ++k) {
        CHECK(orders[k].error_covered < orders[k - 1].error_covered);
        CHECK(orders[k].order_covered == doctest::Approx(1.0).epsilon(0.1));
    }
    // slivers of width O(delta) limit the full-domain order to 1/p
    CHECK(orders.back().order_full == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("Jensen contraction on seeded piecewise functions")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto f = random_piecewise(-0.5, 0.5, 7, seed);
        const auto r = jensen_check(scalar(f), Box::interval(-0.5, 0.5), dyadic(1, 7), 3.0);
        CHECK(r.holds);
        for (const auto& e : r.entries)
            CHECK(e.lhs <= e.rhs + 1e-10 * std::max(1.0, e.rhs));
    }
    CHECK_THROWS(random_piecewise(0.0, 1.0, 0, 1));
}

TEST_CASE("closed-form bank reproduces the explicit correctors")
{
    const auto c = reference_coefficient();
    const double a_star = oracle::reference_a_star();
    for (auto kind : {CorrectorKind::periodic, CorrectorKind::full}) {
        const auto bank = CorrectorBank::closed_form_1d(c, kind, a_star);
        const auto w = corrector_1d(1.0, c, kind, a_star);
        for (double eta : {-1.5, 0.3, 2.0})
            for (double y : {-3.2, 0.0, 0.41, 7.7})
                CHECK(bank->gradient(make_vec({eta}), make_vec({y}))[0] ==
                      doctest::Approx(eta * w.grad(y)).epsilon(1e-12).scale(1e-12));
        CHECK(bank->gradient(make_vec({0.0}), make_vec({0.2}))[0] == 0.0);
        CHECK(bank->solves() == 0);
    }
}

TEST_CASE("solved bank caches directions and respects its budget")
{
    DefectSetup setup;
    setup.coefficient = reference_coefficient();
    setup.domain = {1, 20.0, 128};
    setup.use_closed_form_1d = false;
    const auto bank = CorrectorBank::solved(setup, CorrectorKind::periodic, 1);
    bank->prepare(make_vec({2.0}));
    // -eta and t eta reuse the cached unit direction
    const double g = bank->gradient(make_vec({-0.5}), make_vec({0.25}))[0];
    CHECK(bank->solves() == 1);
    CHECK(bank->cached() == 1);
    const auto exact = corrector_1d(-0.5, reference_coefficient(), CorrectorKind::periodic,
                                    oracle::reference_a_star());
    CHECK(g == doctest::Approx(exact.grad(0.25)).epsilon(1e-3));

    DefectSetup two = setup;
    two.coefficient = std::make_shared<const Coefficient>(PeriodicCoefficient::cosine(2, 2.0, 1.0, 4.0),
                                                          std::nullopt, 3.0);
    two.domain = {2, 2.0, 16};
    two.cell.n = 8;
    const auto b2 = CorrectorBank::solved(two, CorrectorKind::periodic, 1);
    b2->prepare(make_vec({1.0, 0.0}));
    CHECK_THROWS_AS(b2->gradient(make_vec({0.0, 1.0}), make_vec({0.1, 0.1})), MissingCorrector);
}

TEST_CASE("two-scale field checks the bank kind")
{
    const auto c = reference_coefficient();
    const auto bank = CorrectorBank::closed_form_1d(c, CorrectorKind::periodic, oracle::reference_a_star());
    const auto m = discretize([](double) { return 1.0; }, -0.5, 0.5, 0.1);
    const Field grad = [](const Vec&) { return make_vec({1.0}); };
    CHECK_THROWS_AS(two_scale_field(grad, m, bank, 0.1, CorrectorKind::full), InvalidArgument);
    const auto f = two_scale_field(grad, m, bank, 0.1, CorrectorKind::periodic);
    const auto w = corrector_1d(1.0, c, CorrectorKind::periodic, oracle::reference_a_star());
    CHECK(f(make_vec({0.03}))[0] == doctest::Approx(1.0 + w.grad(0.3)).epsilon(1e-12));
}

TEST_CASE("constant coefficient: the two-scale field is the homogenized gradient")
{
    auto c = std::make_shared<const Coefficient>(PeriodicCoefficient::constant(1, 2.0, 3.0),
                                                 std::nullopt, 3.0);
    const auto bank = CorrectorBank::closed_form_1d(c, CorrectorKind::full, 2.0);
    const Field grad = [](const Vec& x) { return make_vec({std::cos(x[0])}); };
    const auto m = discretize(grad, Box::interval(-0.5, 0.5), 0.05, 1);
    const auto f = two_scale_field(grad, m, bank, 0.05, CorrectorKind::full);
    for (double x : {-0.47, -0.1, 0.0, 0.33})
        CHECK(f(make_vec({x}))[0] == grad(make_vec({x}))[0]);
}

TEST_CASE("convergence study trends on the reference problem")
{
    Problem1D prob;
    prob.coefficient = reference_coefficient();
    prob.rhs = Rhs::linear(2.0);
    const std::vector<double> eps{0.1, 0.05, 0.01, 0.005};
    for (auto kind : {CorrectorKind::periodic, CorrectorKind::full}) {
        const auto s = convergence_study(prob, eps, kind, 1.0, 1);
        REQUIRE(s.records.size() == eps.size());
        CHECK(s.a_star == doctest::Approx(oracle::reference_a_star()).epsilon(1e-12));
        for (std::size_t k = 1; k < eps.size(); ++k) {
            CHECK(s.records[k].flux_res_1 < s.records[k - 1].flux_res_1);
            CHECK(s.records[k].two_scale_Lp < s.records[k - 1].two_scale_Lp);
            CHECK(s.records[k].L2_u_err < s.records[k - 1].L2_u_err);
        }
        for (const auto& r : s.records) {
            CHECK(r.delta == r.eps);
            CHECK(r.flux_res_1 == doctest::Approx(std::abs(r.C_eps - s.C_star)).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(convergence_study(prob, {0.01, 0.1}, CorrectorKind::full), InvalidArgument);
    CHECK_THROWS_AS(convergence_study(prob, eps, CorrectorKind::full, 1.5), InvalidArgument);
}
