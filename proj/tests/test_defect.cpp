#include "phom/defect.hpp"
#include "phom/errors.hpp"
#include "phom/oned.hpp"

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

DefectSetup reference_setup(Truncation t = Truncation::natural)
{
    DefectSetup s;
    s.coefficient = reference_coefficient();
    s.domain = {1, 20.0, 128, t};
    return s;
}

double closed_form_error(const DefectSolve& s, double xi)
{
    // w~' = xi [(a*/a)^{1/2} - (a*/a_per)^{1/2}] at p = 3
    const double a_star = oracle::reference_a_star();
    const auto lat = s.domain.lattice();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < s.gradient.size(); ++k) {
        const double y = lat.sample_point(k)[0];
        const double exact =
            xi * (std::sqrt(a_star / oracle::reference_a(y)) - std::sqrt(a_star / oracle::reference_a_per(y)));
        num += std::pow(std::abs(s.gradient[k][0] - exact), 3.0);
        den += std::pow(std::abs(exact), 3.0);
    }
    return std::cbrt(num / den);
}

}  // namespace

TEST_CASE("1D defect corrector matches the closed form")
{
    const auto s0 = solve_defect(make_vec({1.0}), reference_setup(Truncation::natural));
    CHECK(closed_form_error(s0, 1.0) <= 1e-2);
    CHECK(s0.truncation_share < 1e-6);
    // The exact corrector has different limits at +-infinity, so zero boundary
    // values force an O(1/R) flux shift; the Dirichlet minimum can only be higher.
    const auto sd = solve_defect(make_vec({1.0}), reference_setup(Truncation::dirichlet));
    CHECK(sd.energy >= s0.energy - 1e-12 * std::abs(s0.energy));
    auto setup = reference_setup();
    setup.use_closed_form_1d = false;  // periodic gradient from a cell solve
    const auto s = solve_defect(make_vec({1.0}), setup);
    CHECK(closed_form_error(s, 1.0) <= 1e-2);
}

TEST_CASE("defect corrector is odd-homogeneous of degree one")
{
    const auto setup = reference_setup();
    const auto base = solve_defect(make_vec({1.0}), setup);
    for (double t : {-2.0, 0.5, 3.0}) {
        const auto s = solve_defect(make_vec({t}), setup);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < s.gradient.size(); ++k) {
            num += std::pow(std::abs(s.gradient[k][0] - t * base.gradient[k][0]), 3.0);
            den += std::pow(std::abs(t * base.gradient[k][0]), 3.0);
        }
        CHECK(std::cbrt(num / den) <= 10 * setup.minimize.tol);
        CHECK(s.norms.lp_prime / std::abs(t) ==
              doctest::Approx(base.norms.lp_prime).epsilon(1e-2));
    }
}

TEST_CASE("zero gradient and no defect give the zero corrector")
{
    const auto s = solve_defect(make_vec({0.0}), reference_setup());
    CHECK(s.values.cwiseAbs().maxCoeff() == 0.0);
    DefectSetup plain = reference_setup();
    plain.coefficient = std::make_shared<const Coefficient>(
        PeriodicCoefficient::cosine(1, 2.0, 1.0, 14.0), std::nullopt, 3.0);
    const auto z = solve_defect(make_vec({1.0}), plain);
    CHECK(z.norms.lp < 1e-12);
}

TEST_CASE("norm bookkeeping and the annulus tail")
{
    const auto s = solve_defect(make_vec({1.0}), reference_setup());
    CHECK(s.norms.wu == doctest::Approx(s.norms.wu_from_annuli).epsilon(1e-10));
    const auto tail = integrability_report(s);
    CHECK(tail.max_ratio_beyond(4.0) < 0.5);
    for (std::size_t k = 1; k < tail.cumulative.size(); ++k)
        CHECK(tail.cumulative[k] >= tail.cumulative[k - 1]);
    CHECK(tail.lp_prime_over_xi == doctest::Approx(s.norms.lp_prime));
    double total = 0.0;
    for (const auto& a : s.annuli)
        total += a.grad_p;
    CHECK(std::pow(total, 1.0 / 3.0) == doctest::Approx(s.norms.lp).epsilon(1e-12));
}

TEST_CASE("energy sandwich around the defect functional")
{
    const auto setup = reference_setup();
    const auto u = periodic_gradient(setup, make_vec({1.0}));
    const auto s = solve_defect(u, setup);
    CHECK(s.energy < 0.0);
    CHECK(defect_energy(*setup.coefficient, u, setup.domain, s.values) ==
          doctest::Approx(s.energy).epsilon(1e-12));
    CHECK(defect_energy(*setup.coefficient, u, setup.domain, Eigen::VectorXd::Zero(s.values.size())) ==
          0.0);
    // pointwise constants of g_u at p = 3: 1/2 min(3/2, 1/3) below, 3 above
    const auto r = coercivity_check(s, setup, u, 12, 7, 1.0 / 6.0, 3.0);
    CHECK(r.two_constant_holds);
    CHECK(r.upper_holds);
    CHECK(r.C_min > 0.0);
    CHECK(r.samples.size() >= 12);
}

TEST_CASE("continuity scan stays bounded")
{
    const auto rep = continuity_scan(reference_setup(), {make_vec({1.0}), make_vec({-0.7})},
                                     {1e-1, 1e-2, 1e-3}, 1.0, 1);
    CHECK(rep.bounded);
    CHECK(rep.growth <= 2.0);
    CHECK(rep.beta_tilde == doctest::Approx(0.5));
    CHECK(rep.entries.size() == 6);
}

TEST_CASE("domain checks and defaults")
{
    TruncatedDomain bad{1, 20.0, 8};
    CHECK_THROWS(bad.lattice());
    TruncatedDomain ok{1, 2.0, 16};
    CHECK(ok.lattice().num_cells() == 64);
    const auto c = reference_coefficient();
    CHECK(default_truncation_radius(*c) == std::ceil(c->defect()->decay_radius()) + 16);
    const auto bases = seeded_bases(2, 5, 1);
    REQUIRE(bases.size() == 5);
    for (const auto& b : bases) {
        CHECK(b.norm() >= 0.5 - 1e-12);
        CHECK(b.norm() <= 2.0 + 1e-12);
    }
    CHECK(seeded_bases(2, 5, 1)[3] == bases[3]);
}

TEST_CASE("2D defect solve converges on a small box")
{
    DefectSetup s;
    s.coefficient = std::make_shared<const Coefficient>(
        PeriodicCoefficient::cosine(2, 2.0, 1.0, 14.0), DefectCoefficient::gaussian(2, 3.0, 1.0), 3.0);
    s.domain = {2, 3.0, 16};
    s.cell.n = 16;
    const auto d = solve_defect(make_vec({1.0, 0.0}), s);
    CHECK(d.residual <= s.minimize.tol);
    CHECK(d.energy < 0.0);
    CHECK(d.norms.lp > 0.0);
}
