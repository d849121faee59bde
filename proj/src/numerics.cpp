#include "phom/numerics.hpp"

#include "phom/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cassert>

namespace phom {

Vec make_vec(std::initializer_list<double> components)
{
    Vec v(static_cast<Eigen::Index>(components.size()));
    Eigen::Index i = 0;
    for (double c : components)
        v[i++] = c;
    return v;
}

Vec zero_vec(int dim) { return Vec::Zero(dim); }

Vec unit_vec(int dim, int axis)
{
    Vec v = Vec::Zero(dim);
    v[axis] = 1.0;
    return v;
}

namespace {

template <int N>
GaussRule expand_boost_rule()
{
    using Rule = boost::math::quadrature::gauss<double, N>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    GaussRule r;
    // boost stores the non-negative half; mirror it
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0)
            continue;
        r.nodes.push_back(-x[i]);
        r.weights.push_back(w[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.nodes.push_back(x[i]);
        r.weights.push_back(w[i]);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int order)
{
    static const GaussRule rule4 = expand_boost_rule<4>();
    static const GaussRule rule8 = expand_boost_rule<8>();
    switch (order) {
    case 4:
        return rule4;
    case 8:
        return rule8;
    default:
        throw InvalidArgument("gauss_legendre: supported orders are 4 and 8");
    }
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int order)
{
    const auto& g = gauss_legendre(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        s += g.weights[i] * f(mid + half * g.nodes[i]);
    return s * half;
}

CompositeRule::CompositeRule(Interval domain, std::size_t cells, std::span<const double> splits,
                             int order)
    : order_(order)
{
    if (cells == 0 || !(domain.hi > domain.lo))
        throw InvalidArgument("CompositeRule: need a nonempty interval and at least one cell");
    breaks_.reserve(cells + 1 + splits.size());
    for (std::size_t i = 0; i <= cells; ++i)
        breaks_.push_back(domain.lo + domain.length() * static_cast<double>(i) /
                                          static_cast<double>(cells));
    breaks_.back() = domain.hi;
    const double min_gap = 1e-14 * domain.length();
    for (double s : splits) {
        if (!(s > domain.lo + min_gap && s < domain.hi - min_gap))
            continue;
        auto it = std::lower_bound(breaks_.begin(), breaks_.end(), s);
        if (std::abs(*it - s) <= min_gap || std::abs(*(it - 1) - s) <= min_gap)
            continue;
        breaks_.insert(it, s);
    }

    const auto& g = gauss_legendre(order);
    nodes_.reserve((breaks_.size() - 1) * g.nodes.size());
    weights_.reserve(nodes_.capacity());
    for (std::size_t c = 0; c + 1 < breaks_.size(); ++c) {
        const double mid = 0.5 * (breaks_[c] + breaks_[c + 1]);
        const double half = 0.5 * (breaks_[c + 1] - breaks_[c]);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            nodes_.push_back(mid + half * g.nodes[i]);
            weights_.push_back(half * g.weights[i]);
        }
    }
}

double CompositeRule::integrate_samples(std::span<const double> values) const
{
    assert(values.size() == nodes_.size());
    double s = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j)
        s += weights_[j] * values[j];
    return s;
}

std::vector<double> CompositeRule::primitive_at_nodes(const std::function<double(double)>& g,
                                                      double anchor) const
{
    const double tol = 1e-12 * (breaks_.back() - breaks_.front());
    const auto anchor_it = std::find_if(breaks_.begin(), breaks_.end(),
                                        [&](double b) { return std::abs(b - anchor) <= tol; });
    if (anchor_it == breaks_.end())
        throw InvalidArgument("primitive_at_nodes: anchor is not a break of the partition");
    const std::size_t anchor_idx = static_cast<std::size_t>(anchor_it - breaks_.begin());
    const std::size_t n_cells = cells();
    const std::size_t q = static_cast<std::size_t>(order_);

    std::vector<double> cell_integral(n_cells, 0.0);
    for (std::size_t c = 0; c < n_cells; ++c)
        for (std::size_t i = 0; i < q; ++i)
            cell_integral[c] += weights_[c * q + i] * g(nodes_[c * q + i]);

    // value of the primitive at each break, zero at the anchor
    std::vector<double> at_break(breaks_.size(), 0.0);
    for (std::size_t b = anchor_idx + 1; b < breaks_.size(); ++b)
        at_break[b] = at_break[b - 1] + cell_integral[b - 1];
    for (std::size_t b = anchor_idx; b-- > 0;)
        at_break[b] = at_break[b + 1] - cell_integral[b];

    std::vector<double> out(nodes_.size());
    for (std::size_t c = 0; c < n_cells; ++c)
        for (std::size_t i = 0; i < q; ++i) {
            const std::size_t j = c * q + i;
            out[j] = at_break[c] + gauss_integrate(g, breaks_[c], nodes_[j], order_);
        }
    return out;
}

double lq_norm(const CompositeRule& rule, std::span<const double> values, double q)
{
    assert(values.size() == rule.size());
    double s = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j)
        s += rule.weights()[j] * abs_power(values[j], q);
    return std::pow(s, 1.0 / q);
}

double linf_norm(std::span<const double> values)
{
    double m = 0.0;
    for (double v : values)
        m = std::max(m, std::abs(v));
    return m;
}

}  // namespace phom
