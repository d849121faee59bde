#include "phom/numerics.hpp"
#include "phom/parallel.hpp"
#include "phom/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace phom;

TEST_CASE("signed_power is odd and has no NaN at zero")
{
    for (double e : {0.5, 1.0 / 3.0, 2.0, 2.5}) {
        CHECK(signed_power(0.0, e) == 0.0);
        for (double z : {1e-12, 0.3, 2.0, 17.0}) {
            CHECK(signed_power(-z, e) == doctest::Approx(-signed_power(z, e)));
            CHECK(signed_power(z, e) == doctest::Approx(std::pow(z, e)).epsilon(1e-14));
        }
    }
    CHECK(abs_power(0.0, 0.0) == 1.0);
    CHECK(abs_power(0.0, 1.5) == 0.0);
    CHECK(abs_power(-3.0, 2.0) == doctest::Approx(9.0));
}

TEST_CASE("Gauss-Legendre rules are exact for polynomials of degree 2n-1")
{
    for (int order : {4, 8}) {
        const auto& r = gauss_legendre(order);
        REQUIRE(r.nodes.size() == static_cast<std::size_t>(order));
        CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(2.0));
        const int deg = 2 * order - 1;
        auto mono = [deg](double x) { return std::pow(x, deg - 1) + std::pow(x, deg); };
        const double exact = ((deg - 1) % 2 == 0) ? 2.0 / deg : 0.0;
        CHECK(gauss_integrate(mono, -1.0, 1.0, order) == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("composite rule integrates across split points")
{
    const std::vector<double> splits{0.1234, -0.377};
    CompositeRule rule({-0.5, 0.5}, 37, splits, 8);
    for (double s : splits)
        CHECK(std::find(rule.breaks().begin(), rule.breaks().end(), s) != rule.breaks().end());
    CHECK(rule.integrate([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
    // |x - s| has a kink at the split, integrated exactly
    const double s = splits[0];
    const double exact = ((0.5 - s) * (0.5 - s) + (s + 0.5) * (s + 0.5)) / 2.0;
    CHECK(rule.integrate([s](double x) { return std::abs(x - s); }) ==
          doctest::Approx(exact).epsilon(1e-14));
    for (std::size_t j = 0; j < rule.size(); ++j) {
        const std::size_t c = rule.cell_of_node(j);
        CHECK(rule.nodes()[j] > rule.breaks()[c]);
        CHECK(rule.nodes()[j] < rule.breaks()[c + 1]);
    }
}

TEST_CASE("primitive at nodes matches a closed form")
{
    CompositeRule rule({0.0, 2.0}, 16);
    const auto F = rule.primitive_at_nodes([](double x) { return std::cos(x); }, 0.0);
    for (std::size_t j = 0; j < rule.size(); ++j)
        CHECK(F[j] == doctest::Approx(std::sin(rule.nodes()[j])).epsilon(1e-12));
}

TEST_CASE("discrete norms")
{
    CompositeRule rule({0.0, 1.0}, 8);
    std::vector<double> v(rule.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = rule.nodes()[j];
    CHECK(lq_norm(rule, v, 2.0) == doctest::Approx(std::sqrt(1.0 / 3.0)));
    CHECK(lq_norm(rule, v, 3.0) == doctest::Approx(std::cbrt(0.25)));
    CHECK(linf_norm(v) == doctest::Approx(rule.nodes().back()));
}

TEST_CASE("counter RNG is a pure function of (seed, index, lane)")
{
    CounterRng a(7), b(7), c(8);
    for (std::uint64_t i = 0; i < 100; ++i) {
        CHECK(a.bits(i, 3) == b.bits(i, 3));
        CHECK(a.bits(i, 3) != c.bits(i, 3));
        const double u = a.uniform(i, 0);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(std::abs(a.clipped_cauchy(i, 1, 5.0)) <= 5.0);
    }
    double mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        mean += a.uniform(i, 9);
    CHECK(mean / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("parallel_map keeps index order for any thread count")
{
    auto fn = [](std::size_t i) { return static_cast<double>(i * i) + 0.5; };
    const auto one = parallel_map<double>(1000, 1, fn);
    for (unsigned t : {2u, 3u, 8u})
        CHECK(parallel_map<double>(1000, t, fn) == one);
    CHECK(parallel_map<double>(0, 4, fn).empty());
}
