#pragma once

// Small numerical helpers shared by every module. Most of it is composite
// Gauss-Legendre quadrature on intervals.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace phom {

/// Point or direction in R^d, d <= 3. Stack allocated.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

Vec make_vec(std::initializer_list<double> components);
Vec zero_vec(int dim);
Vec unit_vec(int dim, int axis);

/// sgn(z)|z|^e, with the z = 0 branch returning 0 (no NaN at sign changes).
inline double signed_power(double z, double exponent)
{
    if (z == 0.0)
        return 0.0;
    const double m = std::exp(std::log(std::abs(z)) * exponent);
    return z > 0.0 ? m : -m;
}

/// |v|^e with 0^e = 0 for e > 0 and 0^0 = 1.
inline double abs_power(double v, double exponent)
{
    const double a = std::abs(v);
    if (a == 0.0)
        return exponent == 0.0 ? 1.0 : 0.0;
    return std::pow(a, exponent);
}

struct Interval {
    double lo = -0.5;
    double hi = 0.5;
    double length() const { return hi - lo; }
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], n in {4, 8}.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Integral of f over [a, b] with one Gauss-Legendre panel.
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int order = 8);

/// Composite Gauss-Legendre rule on a partition of an interval.
///
/// Node j lives in cell j / order. The partition is uniform apart from the
/// optional split points, which are inserted as additional breaks so that kinks
/// of the integrand land on cell boundaries.
class CompositeRule {
public:
    CompositeRule(Interval domain, std::size_t cells, std::span<const double> splits = {},
                  int order = 8);

    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t cells() const { return breaks_.size() - 1; }
    int order() const { return order_; }
    Interval domain() const { return {breaks_.front(), breaks_.back()}; }
    std::size_t cell_of_node(std::size_t j) const { return j / static_cast<std::size_t>(order_); }

    template <class F>
    double integrate(F&& f) const
    {
        double s = 0.0;
        for (std::size_t j = 0; j < nodes_.size(); ++j)
            s += weights_[j] * f(nodes_[j]);
        return s;
    }

    /// Sum of w_j * values[j]; values must be sampled on nodes().
    double integrate_samples(std::span<const double> values) const;

    /// Values of the primitive x -> int_anchor^x g at every node; anchor must be a break.
    std::vector<double> primitive_at_nodes(const std::function<double(double)>& g,
                                           double anchor) const;

private:
    std::vector<double> breaks_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    int order_;
};

/// (sum_j w_j |values_j|^q)^{1/q} and max_j |values_j| over a rule.
double lq_norm(const CompositeRule& rule, std::span<const double> values, double q);
double linf_norm(std::span<const double> values);

}  // namespace phom
