#include "phom/errors.hpp"
#include "phom/oned.hpp"

#include "baselines.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace phom;

namespace {

std::shared_ptr<const Coefficient> reference_coefficient()
{
    return std::make_shared<const Coefficient>(PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0),
                                               DefectCoefficient::exponential(1, 10.0, 1.0), 3.0);
}

Problem1D reference_problem(double eps)
{
    Problem1D prob;
    prob.coefficient = reference_coefficient();
    prob.rhs = Rhs::linear(2.0);
    prob.epsilon = eps;
    return prob;
}

}  // namespace

TEST_CASE("homogenized coefficient matches the elliptic-integral value")
{
    const double ref = oracle::reference_a_star();
    CHECK(ref == doctest::Approx(baseline::a_star).epsilon(1e-14));
    CHECK(homogenized_coefficient_1d(PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0), 3.0) ==
          doctest::Approx(ref).epsilon(1e-12));
    for (double p : {2.0, 2.5, 4.0}) {
        const double q = oracle::a_star([](double y) { return 3.0 + 1.5 * std::cos(2 * oracle::pi * y); }, p);
        CHECK(homogenized_coefficient_1d(PeriodicCoefficient::cosine(1, 3.0, 1.5, 10.0), p) ==
              doctest::Approx(q).epsilon(1e-11));
    }
    CHECK(homogenized_coefficient_1d(PeriodicCoefficient::constant(1, 2.5, 3.0), 3.7) ==
          doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("flux constant agrees with an independent quadrature and root finder")
{
    for (double eps : {0.1, 0.05}) {
        const auto u = solve_flux_constant(reference_problem(eps));
        const double ref = oracle::reference_flux_constant(oracle::reference_a, eps, 3.0);
        CHECK(u.C == doctest::Approx(ref).epsilon(1e-9));
    }
    const auto h = solve_homogenized_1d(Rhs::linear(2.0), oracle::reference_a_star(), 3.0, {});
    const double ref =
        oracle::reference_flux_constant([](double) { return oracle::reference_a_star(); }, 1.0, 3.0);
    CHECK(h.C == doctest::Approx(ref).epsilon(1e-10));
    CHECK(h.C == doctest::Approx(baseline::C_star).epsilon(1e-5));
}

TEST_CASE("solution satisfies the flux identity and the boundary conditions")
{
    const auto prob = reference_problem(0.05);
    const auto u = solve_flux_constant(prob);
    for (double x : {-0.49, -0.2, 0.0, 0.13, 0.41}) {
        const double g = u.grad(x);
        const double a = prob.coefficient->at(x / prob.epsilon);
        CHECK(a * std::abs(g) * g == doctest::Approx(u.flux(x)).epsilon(1e-12));
    }
    std::vector<double> br{-0.5, 0.5};
    br.insert(br.end(), u.sign_changes.begin(), u.sign_changes.end());
    for (int k = -9; k <= 9; ++k)
        br.push_back(k * prob.epsilon);
    std::sort(br.begin(), br.end());
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i)
        mean += oracle::integrate([&](double x) { return u.grad(x); }, br[i], br[i + 1]);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(u.residual < 1e-10);
}

TEST_CASE("tabulated antiderivative matches the closed form")
{
    Antiderivative closed(Rhs::linear(2.0), {-0.5, 0.5});
    Antiderivative tab(Rhs::custom([](double x) { return 2 * x; }, "2x"), {-0.5, 0.5});
    for (double x : {-0.5, -0.3, 0.0, 0.27, 0.5}) {
        CHECK(closed(x) == doctest::Approx(x * x - 0.25).epsilon(1e-13));
        CHECK(tab(x) == doctest::Approx(x * x - 0.25).epsilon(1e-12));
    }
    const auto roots = tab.level_crossings(-0.16);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == doctest::Approx(-0.3).epsilon(1e-10));
    CHECK(roots[1] == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("rhs scaling multiplies the solution by t^{1/(p-1)}")
{
    auto prob = reference_problem(0.1);
    const auto u1 = solve_flux_constant(prob);
    prob.rhs = Rhs::linear(2.0 * 8.0);
    const auto u8 = solve_flux_constant(prob);
    for (double x : {-0.4, 0.1, 0.35})
        CHECK(u8.grad(x) == doctest::Approx(std::sqrt(8.0) * u1.grad(x)).epsilon(1e-9));
}

TEST_CASE("periodic corrector has zero cell mean and full corrector decays")
{
    const auto c = reference_coefficient();
    const double a_star = homogenized_coefficient_1d(c->periodic(), 3.0);
    const auto w = corrector_1d(1.0, c, CorrectorKind::periodic, a_star);
    CHECK(oracle::integrate([&](double y) { return w.grad(y); }, -0.5, 0.5) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const auto wf = corrector_1d(-2.0, c, CorrectorKind::full, a_star);
    CHECK(std::abs(wf.defect_grad(30.0)) < 1e-12);
    CHECK(std::abs(wf.defect_grad(0.0)) > 0.1);
    // homogeneity of the explicit corrector
    const auto w2 = corrector_1d(-2.0, c, CorrectorKind::periodic, a_star);
    CHECK(w2.grad(0.3) == doctest::Approx(-2.0 * w.grad(0.3)).epsilon(1e-14));
    CHECK_THROWS(corrector_1d(1.0, c, CorrectorKind::periodic, -1.0));
}

TEST_CASE("constant coefficient has zero remainders")
{
    Problem1D prob;
    prob.coefficient = std::make_shared<const Coefficient>(
        PeriodicCoefficient::constant(1, 1.7, 2.0), std::nullopt, 3.0);
    prob.rhs = Rhs::sine(1.0, 1.0);
    prob.epsilon = 0.05;
    const auto r = remainder_report(prob);
    CHECK(r.a_star == 1.7);
    CHECK(r.periodic.linf == 0.0);
    CHECK(r.full.l2 == 0.0);
    CHECK(r.C_eps == doctest::Approx(r.C_star).epsilon(1e-12));
}

TEST_CASE("reference remainders stay at their frozen values")
{
    const std::vector<double> eps(std::begin(baseline::eps), std::begin(baseline::eps) + 3);
    const auto reps = table_sweep(reference_problem(eps.front()), eps, 1);
    REQUIRE(reps.size() == eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        CAPTURE(eps[i]);
        CHECK(reps[i].periodic.linf == doctest::Approx(baseline::R_per_Linf[i]).epsilon(1e-5));
        CHECK(reps[i].full.linf == doctest::Approx(baseline::R_Linf[i]).epsilon(1e-5));
        CHECK(reps[i].periodic.l2 == doctest::Approx(baseline::R_per_L2[i]).epsilon(1e-5));
        CHECK(reps[i].full.l2 == doctest::Approx(baseline::R_L2[i]).epsilon(1e-5));
        CHECK(reps[i].C_eps == doctest::Approx(baseline::C_eps[i]).epsilon(1e-5));
    }
}

TEST_CASE("zero rhs gives the zero solution")
{
    auto prob = reference_problem(0.1);
    prob.rhs = Rhs::zero();
    const auto u = solve_flux_constant(prob);
    CHECK(u.C == 0.0);
    CHECK(u.grad(0.2) == 0.0);
}
