#include "phom/coeffs.hpp"

#include "phom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace phom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dim(int dim)
{
    if (dim < 1 || dim > 3)
        throw InvalidArgument("coefficient dimension must be 1, 2 or 3");
}

// Visits every node of a tensor grid with n points per axis on [lo, hi]^d,
// endpoints included.
template <class F>
void for_each_box_node(int dim, int n, double lo, double hi, F&& f)
{
    Vec y(dim);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k)
        total *= static_cast<std::size_t>(n);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rest = lin;
        for (int k = dim - 1; k >= 0; --k) {
            const auto i = static_cast<double>(rest % static_cast<std::size_t>(n));
            rest /= static_cast<std::size_t>(n);
            y[k] = lo + step * i;
        }
        f(y);
    }
}

}  // namespace

// ---------------------------------------------------------------- periodic

PeriodicCoefficient::PeriodicCoefficient(int dim, ScalarField evaluator, double lambda,
                                         double lipschitz, std::string description,
                                         bool constant)
    : dim_(dim),
      eval_(std::move(evaluator)),
      lambda_(lambda),
      lipschitz_(lipschitz),
      description_(std::move(description)),
      constant_(constant)
{
    require_dim(dim);
    if (!(lambda > 0.0))
        throw InvalidArgument("coercivity bound lambda must be positive");
    if (!(lipschitz >= 0.0))
        throw InvalidArgument("Lipschitz constant must be nonnegative");
}

PeriodicCoefficient PeriodicCoefficient::constant(int dim, double value, double lambda)
{
    std::ostringstream d;
    d << "constant(" << value << ")";
    return {dim, [value](const Vec&) { return value; }, lambda, 0.0, d.str(), true};
}

PeriodicCoefficient PeriodicCoefficient::cosine(int dim, double mean, double amplitude,
                                                double lambda)
{
    std::ostringstream d;
    d << "cosine(" << mean << ", " << amplitude << ")";
    const double scale = amplitude / dim;
    auto f = [mean, scale](const Vec& y) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i)
            s += std::cos(kTwoPi * y[i]);
        return mean + scale * s;
    };
    return {dim, f, lambda, kTwoPi * std::abs(amplitude) / std::sqrt(double(dim)), d.str(),
            amplitude == 0.0};
}

PeriodicCoefficient PeriodicCoefficient::laminate(int dim, double mean, double amplitude,
                                                  double lambda)
{
    std::ostringstream d;
    d << "laminate(" << mean << ", " << amplitude << ")";
    auto f = [mean, amplitude](const Vec& y) { return mean + amplitude * std::cos(kTwoPi * y[0]); };
    return {dim, f, lambda, kTwoPi * std::abs(amplitude), d.str(), amplitude == 0.0};
}

PeriodicCoefficient PeriodicCoefficient::product_cosine(int dim, double mean, double amplitude,
                                                        double lambda)
{
    std::ostringstream d;
    d << "product_cosine(" << mean << ", " << amplitude << ")";
    auto f = [mean, amplitude](const Vec& y) {
        double s = amplitude;
        for (Eigen::Index i = 0; i < y.size(); ++i)
            s *= std::cos(kTwoPi * y[i]);
        return mean + s;
    };
    return {dim, f, lambda, kTwoPi * std::abs(amplitude) * std::sqrt(double(dim)), d.str(),
            amplitude == 0.0};
}

PeriodicCoefficient PeriodicCoefficient::tabulated(int dim, int resolution,
                                                   std::vector<double> values, double lambda)
{
    require_dim(dim);
    if (resolution < 2)
        throw InvalidArgument("tabulated coefficient needs at least 2 nodes per axis");
    std::size_t expected = 1;
    for (int k = 0; k < dim; ++k)
        expected *= static_cast<std::size_t>(resolution);
    if (values.size() != expected)
        throw InvalidArgument("tabulated coefficient: expected n^d values");

    double lip = 0.0;
    const double h = 1.0 / resolution;
    for (std::size_t lin = 0; lin < expected; ++lin) {
        std::size_t stride = 1;
        for (int k = dim - 1; k >= 0; --k) {
            const std::size_t i = (lin / stride) % static_cast<std::size_t>(resolution);
            const std::size_t next = i + 1 == static_cast<std::size_t>(resolution)
                                         ? lin - i * stride
                                         : lin + stride;
            lip = std::max(lip, std::abs(values[next] - values[lin]) / h);
            stride *= static_cast<std::size_t>(resolution);
        }
    }
    const bool is_const = std::all_of(values.begin(), values.end(),
                                      [&](double v) { return v == values.front(); });

    auto f = [dim, n = resolution, vals = std::move(values)](const Vec& y) {
        // corner weights of the cell containing y
        std::size_t base[3] = {0, 0, 0};
        std::size_t upper[3] = {0, 0, 0};
        double frac[3] = {0, 0, 0};
        for (int k = 0; k < dim; ++k) {
            double t = (y[k] + 0.5) * n;
            t -= std::floor(t / n) * n;
            double fl = std::floor(t);
            std::size_t i = static_cast<std::size_t>(fl) % static_cast<std::size_t>(n);
            base[k] = i;
            upper[k] = (i + 1) % static_cast<std::size_t>(n);
            frac[k] = t - fl;
        }
        double s = 0.0;
        for (int corner = 0; corner < (1 << dim); ++corner) {
            double w = 1.0;
            std::size_t lin = 0;
            for (int k = 0; k < dim; ++k) {
                const bool up = (corner >> k) & 1;
                w *= up ? frac[k] : 1.0 - frac[k];
                lin = lin * static_cast<std::size_t>(n) + (up ? upper[k] : base[k]);
            }
            if (w != 0.0)
                s += w * vals[lin];
        }
        return s;
    };
    std::ostringstream d;
    d << "tabulated(d=" << dim << ", n=" << resolution << ")";
    return {dim, f, lambda, lip, d.str(), is_const};
}

PeriodicCoefficient PeriodicCoefficient::read_tabulated(const std::string& path, double lambda)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open tabulated coefficient file '" + path + "'");
    int dim = 0, n = 0;
    if (!(in >> dim >> n))
        throw InvalidArgument("tabulated coefficient file '" + path + "': bad header");
    require_dim(dim);
    if (n < 2)
        throw InvalidArgument("tabulated coefficient file '" + path + "': n must be >= 2");
    std::vector<double> values;
    double v = 0.0;
    while (in >> v)
        values.push_back(v);
    if (!in.eof())
        throw InvalidArgument("tabulated coefficient file '" + path + "': non-numeric value");
    return tabulated(dim, n, std::move(values), lambda);
}

// ---------------------------------------------------------------- defect

DefectCoefficient::DefectCoefficient(int dim, ScalarField evaluator, double decay_radius,
                                     std::string description)
    : dim_(dim),
      eval_(std::move(evaluator)),
      decay_radius_(decay_radius),
      description_(std::move(description))
{
    require_dim(dim);
    if (!(decay_radius > 0.0))
        throw InvalidArgument("defect decay radius must be positive");
}

DefectCoefficient DefectCoefficient::exponential(int dim, double amplitude, double rate,
                                                 double tail_bound)
{
    if (!(rate > 0.0) || !(tail_bound > 0.0))
        throw InvalidArgument("exponential defect: rate and tail bound must be positive");
    const double radius = std::max(1.0, std::log(std::abs(amplitude) / tail_bound) / rate);
    std::ostringstream d;
    d << "exponential(" << amplitude << ", " << rate << ")";
    auto f = [amplitude, rate](const Vec& y) { return amplitude * std::exp(-rate * y.norm()); };
    return {dim, f, radius, d.str()};
}

DefectCoefficient DefectCoefficient::gaussian(int dim, double amplitude, double width,
                                              double tail_bound)
{
    if (!(width > 0.0) || !(tail_bound > 0.0))
        throw InvalidArgument("gaussian defect: width and tail bound must be positive");
    const double ratio = std::abs(amplitude) / tail_bound;
    const double radius = std::max(1.0, width * std::sqrt(std::max(0.0, std::log(ratio))));
    std::ostringstream d;
    d << "gaussian(" << amplitude << ", " << width << ")";
    auto f = [amplitude, width](const Vec& y) {
        return amplitude * std::exp(-y.squaredNorm() / (width * width));
    };
    return {dim, f, radius, d.str()};
}

double DefectCoefficient::power_integral(double q, double radius, int cells_per_axis) const
{
    const auto& g = gauss_legendre(4);
    const double h = 2.0 * radius / cells_per_axis;
    const std::size_t per_axis = static_cast<std::size_t>(cells_per_axis) * g.nodes.size();
    std::vector<double> x(per_axis), w(per_axis);
    for (int c = 0; c < cells_per_axis; ++c)
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const std::size_t j = static_cast<std::size_t>(c) * g.nodes.size() + i;
            x[j] = -radius + h * (c + 0.5) + 0.5 * h * g.nodes[i];
            w[j] = 0.5 * h * g.weights[i];
        }
    std::size_t total = 1;
    for (int k = 0; k < dim_; ++k)
        total *= per_axis;
    double s = 0.0;
    Vec y(dim_);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rest = lin;
        double weight = 1.0;
        for (int k = dim_ - 1; k >= 0; --k) {
            const std::size_t j = rest % per_axis;
            rest /= per_axis;
            y[k] = x[j];
            weight *= w[j];
        }
        s += weight * abs_power(eval_(y), q);
    }
    return s;
}

// ---------------------------------------------------------------- combined

Coefficient::Coefficient(PeriodicCoefficient periodic, std::optional<DefectCoefficient> defect,
                         double p)
    : periodic_(std::move(periodic)), defect_(std::move(defect)), p_(p)
{
    if (!(p >= 2.0))
        throw InvalidArgument("exponent p must satisfy p >= 2");
    if (defect_ && defect_->dim() != periodic_.dim())
        throw InvalidArgument("periodic and defect parts have different dimensions");
}

double Coefficient::operator()(const Vec& y) const
{
    return defect_ ? periodic_(y) + (*defect_)(y) : periodic_(y);
}

double Coefficient::at(double y) const
{
    Vec v(1);
    v[0] = y;
    return (*this)(v);
}

Coefficient Coefficient::periodic_only() const { return {periodic_, std::nullopt, p_}; }

// ---------------------------------------------------------------- validation

int default_validation_resolution(int dim) { return dim == 1 ? 1024 : 128; }

ValidationReport inspect(const Coefficient& c, int grid_resolution)
{
    if (grid_resolution < 2)
        throw InvalidArgument("validation grid resolution must be >= 2");

    ValidationReport r;
    r.resolution = grid_resolution;
    r.lambda = c.lambda();
    const int dim = c.dim();
    const double lo_bound = 1.0 / c.lambda();
    const double hi_bound = c.lambda();
    const auto& per = c.periodic();

    // periodic part on the unit cell, nodes -1/2 + i/n
    r.min_periodic = std::numeric_limits<double>::infinity();
    r.max_periodic = -r.min_periodic;
    for_each_box_node(dim, grid_resolution + 1, -0.5, 0.5, [&](const Vec& y) {
        const double v = per(y);
        r.min_periodic = std::min(r.min_periodic, v);
        r.max_periodic = std::max(r.max_periodic, v);
        for (int k = 0; k < dim; ++k) {
            Vec shifted = y;
            shifted[k] += 1.0;
            r.periodicity_residual = std::max(r.periodicity_residual, std::abs(per(shifted) - v));
        }
    });

    // full coefficient on a box containing the defect core; an odd node count
    // per axis keeps the origin on the grid
    r.min_a = r.min_periodic;
    r.max_a = r.max_periodic;
    if (c.has_defect()) {
        const double half = c.defect()->decay_radius() + 1.0;
        const double cap = dim == 1 ? 4.0e6 : (dim == 2 ? 2000.0 : 160.0);
        int n = static_cast<int>(std::min(cap, grid_resolution * std::ceil(2.0 * half)));
        if (dim > 1)
            n = static_cast<int>(std::min(cap, 8.0 * grid_resolution));
        n += (n % 2 == 0) ? 1 : 0;
        for_each_box_node(dim, n, -half, half, [&](const Vec& y) {
            const double v = c(y);
            r.min_a = std::min(r.min_a, v);
            r.max_a = std::max(r.max_a, v);
        });

        const double q = c.p() / (c.p() - 1.0);
        const double base = c.defect()->decay_radius();
        const int cells = dim == 1 ? 4096 : (dim == 2 ? 256 : 48);
        for (double factor : {0.25, 0.5, 1.0, 2.0}) {
            const double radius = base * factor;
            r.defect_tail.push_back({radius, c.defect()->power_integral(q, radius, cells)});
        }
        const double last = r.defect_tail.back().integral;
        const double prev = r.defect_tail[r.defect_tail.size() - 2].integral;
        r.defect_tail_cauchy = last > 0.0 ? std::abs(last - prev) / last : 0.0;
        r.defect_lp_prime_norm = std::pow(last, 1.0 / q);
    }

    auto fmt = [](const char* what, double v, const char* rel, double bound) {
        std::ostringstream os;
        os.precision(12);
        os << what << " = " << v << " " << rel << " " << bound;
        return os.str();
    };
    if (!(r.min_periodic > lo_bound))
        r.violations.push_back(fmt("min a_per", r.min_periodic, "<=", lo_bound));
    if (!(r.max_periodic < hi_bound))
        r.violations.push_back(fmt("max a_per", r.max_periodic, ">=", hi_bound));
    if (!(r.min_a > lo_bound))
        r.violations.push_back(fmt("min a", r.min_a, "<=", lo_bound));
    if (!(r.max_a < hi_bound))
        r.violations.push_back(fmt("max a", r.max_a, ">=", hi_bound));
    const double periodicity_tol = 1e-10 * std::max(1.0, std::abs(r.max_periodic));
    if (r.periodicity_residual > periodicity_tol)
        r.violations.push_back(fmt("periodicity residual", r.periodicity_residual, ">",
                                   periodicity_tol));
    if (r.defect_tail_cauchy > 1e-3)
        r.violations.push_back(
            fmt("defect L^p' tail Cauchy difference", r.defect_tail_cauchy, ">", 1e-3));
    return r;
}

ValidationReport validate(const Coefficient& c, int grid_resolution)
{
    ValidationReport r = inspect(c, grid_resolution);
    if (!r.passed())
        throw AssumptionViolated(r.violations);
    return r;
}

double defect_tail_max(const DefectCoefficient& defect, double radius, double outer,
                       int samples_per_axis)
{
    double m = 0.0;
    for_each_box_node(defect.dim(), samples_per_axis, -outer, outer, [&](const Vec& y) {
        if (y.lpNorm<Eigen::Infinity>() >= radius)
            m = std::max(m, std::abs(defect(y)));
    });
    return m;
}

}  // namespace phom
