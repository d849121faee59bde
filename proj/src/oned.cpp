#include "phom/oned.hpp"

#include "phom/errors.hpp"
#include "phom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace phom {

// ---------------------------------------------------------------- rhs

Rhs Rhs::zero()
{
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, "zero"};
}

Rhs Rhs::constant(double c)
{
    std::ostringstream d;
    d << "constant(" << c << ")";
    return {[c](double) { return c; }, [c](double x) { return c * x; }, d.str()};
}

Rhs Rhs::linear(double slope, double intercept)
{
    std::ostringstream d;
    d << "linear(" << slope << ", " << intercept << ")";
    return {[=](double x) { return slope * x + intercept; },
            [=](double x) { return 0.5 * slope * x * x + intercept * x; }, d.str()};
}

Rhs Rhs::sine(double amplitude, double frequency)
{
    std::ostringstream d;
    d << "sine(" << amplitude << ", " << frequency << ")";
    const double k = frequency * std::numbers::pi;
    if (k == 0.0)
        return {[](double) { return 0.0; }, [](double) { return 0.0; }, d.str()};
    return {[=](double x) { return amplitude * std::sin(k * x); },
            [=](double x) { return -amplitude / k * std::cos(k * x); }, d.str()};
}

Rhs Rhs::custom(std::function<double(double)> f, std::string description)
{
    return {std::move(f), {}, std::move(description)};
}

// ---------------------------------------------------------------- antiderivative

Antiderivative::Antiderivative(Rhs rhs, Interval omega, std::size_t panels)
    : rhs_(std::move(rhs)), omega_(omega)
{
    if (!rhs_.f)
        throw InvalidArgument("Antiderivative: rhs has no evaluator");
    if (!(omega.hi > omega.lo))
        throw InvalidArgument("Antiderivative: empty interval");
    if (rhs_.primitive)
        return;
    panels = std::max<std::size_t>(panels, 1);
    h_ = omega.length() / static_cast<double>(panels);
    cumulative_.assign(panels + 1, 0.0);
    for (std::size_t i = 0; i < panels; ++i) {
        const double a = omega.lo + static_cast<double>(i) * h_;
        cumulative_[i + 1] = cumulative_[i] + gauss_integrate(rhs_.f, a, a + h_, 8);
    }
}

double Antiderivative::operator()(double x) const
{
    if (rhs_.primitive)
        return rhs_.primitive(x) - rhs_.primitive(omega_.lo);
    const auto last = cumulative_.size() - 1;
    auto i = static_cast<std::size_t>(std::clamp((x - omega_.lo) / h_, 0.0,
                                                 static_cast<double>(last)));
    i = std::min(i, last);
    const double a = omega_.lo + static_cast<double>(i) * h_;
    return cumulative_[i] + (x == a ? 0.0 : gauss_integrate(rhs_.f, a, x, 8));
}

std::vector<double> Antiderivative::level_crossings(double level, std::size_t scan) const
{
    std::vector<double> roots;
    const double step = omega_.length() / static_cast<double>(scan);
    auto g = [&](double x) { return (*this)(x) - level; };
    double x0 = omega_.lo;
    double g0 = g(x0);
    for (std::size_t i = 1; i <= scan; ++i) {
        const double x1 = i == scan ? omega_.hi : omega_.lo + static_cast<double>(i) * step;
        const double g1 = g(x1);
        if (g1 == 0.0 && i < scan) {
            roots.push_back(x1);
        } else if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0)) {
            double a = x0, b = x1, ga = g0;
            while (b - a > 1e-15 * (1.0 + std::abs(a))) {
                const double m = 0.5 * (a + b);
                const double gm = g(m);
                if (gm == 0.0) {
                    a = b = m;
                    break;
                }
                if ((gm < 0.0) == (ga < 0.0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        x0 = x1;
        g0 = g1;
    }
    return roots;
}

// ---------------------------------------------------------------- flux constant

double FluxSolution1D::grad(double x) const
{
    return signed_power(flux(x) / a_of_x(x), 1.0 / (p - 1.0));
}

std::size_t quadrature_cells(const QuadratureSpec& q, Interval omega, double epsilon)
{
    std::size_t cells = q.min_cells;
    if (epsilon > 0.0) {
        const double want = std::ceil(q.cells_per_period * omega.length() / epsilon);
        cells = std::max(cells, static_cast<std::size_t>(want));
    }
    return cells + (cells % 2);
}

namespace {

std::vector<double> interior_points(Interval omega, std::vector<double> pts)
{
    std::vector<double> out;
    for (double x : pts)
        if (x > omega.lo && x < omega.hi)
            out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

FluxSolution1D solve_flux(std::shared_ptr<const Antiderivative> F,
                          std::function<double(double)> a_of_x, double p, Interval omega,
                          std::size_t cells, int order, const std::vector<double>& base_splits)
{
    const double beta = 1.0 / (p - 1.0);
    FluxSolution1D sol;
    sol.p = p;
    sol.F = F;
    sol.a_of_x = a_of_x;

    std::vector<double> splits = interior_points(omega, base_splits);
    const double h0 = omega.length() / static_cast<double>(std::max<std::size_t>(cells, 1));
    double C_prev = 0.0;
    // Later passes put the sign changes of -F + C on cell breaks, with cells
    // shrinking geometrically towards them: the integrand behaves like
    // |x - s|^{1/(p-1)} there.
    for (int pass = 0; pass < 3; ++pass) {
        const CompositeRule rule(omega, cells, splits, order);
        const auto n = rule.size();
        std::vector<double> Fj(n), aj(n);
        double minF = std::numeric_limits<double>::infinity();
        double maxF = -minF;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = rule.nodes()[j];
            Fj[j] = (*F)(x);
            aj[j] = a_of_x(x);
            minF = std::min(minF, Fj[j]);
            maxF = std::max(maxF, Fj[j]);
        }
        for (double x : rule.breaks()) {
            const double v = (*F)(x);
            minF = std::min(minF, v);
            maxF = std::max(maxF, v);
        }
        auto G = [&](double C) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                s += rule.weights()[j] * signed_power((C - Fj[j]) / aj[j], beta);
            return s;
        };

        const double range = maxF - minF;
        if (range == 0.0) {
            sol.C = minF;
            sol.residual = std::abs(G(sol.C));
            sol.iterations = 0;
            sol.sign_changes.clear();
            return sol;
        }
        double lo = minF - 1e-12 * range;
        double hi = maxF + 1e-12 * range;
        double g_lo = G(lo);
        double g_hi = G(hi);
        if (g_lo > 0.0 || g_hi < 0.0)
            throw BracketFailure(lo, g_lo, hi, g_hi);
        if (pass > 0) {
            const double nlo = std::max(lo, C_prev - 1e-6 * range);
            const double nhi = std::min(hi, C_prev + 1e-6 * range);
            const double g_nlo = G(nlo), g_nhi = G(nhi);
            if (g_nlo <= 0.0 && g_nhi >= 0.0) {
                lo = nlo, hi = nhi, g_lo = g_nlo, g_hi = g_nhi;
            }
        }

        int iterations = 0;
        const double width = std::max(1e-13, 1e-15 * (std::abs(minF) + std::abs(maxF)));
        while (hi - lo > width && iterations < 200) {
            const double mid = 0.5 * (lo + hi);
            const double g_mid = G(mid);
            ++iterations;
            if (g_mid == 0.0) {
                lo = hi = mid;
                g_lo = g_hi = 0.0;
                break;
            }
            if (g_mid < 0.0) {
                lo = mid;
                g_lo = g_mid;
            } else {
                hi = mid;
                g_hi = g_mid;
            }
        }
        double C = 0.5 * (lo + hi);
        double g_C = G(C);
        if (g_hi != g_lo) {
            const double secant = lo - g_lo * (hi - lo) / (g_hi - g_lo);
            if (secant >= lo && secant <= hi) {
                const double g_s = G(secant);
                if (std::abs(g_s) < std::abs(g_C)) {
                    C = secant;
                    g_C = g_s;
                }
            }
            ++iterations;
        }
        sol.C = C;
        sol.residual = std::abs(g_C);
        sol.iterations += iterations;
        sol.sign_changes = interior_points(omega, F->level_crossings(C));

        C_prev = C;
        std::vector<double> next = base_splits;
        for (double x : sol.sign_changes) {
            next.push_back(x);
            for (int k = 1; k <= 40; ++k) {
                next.push_back(x - h0 * std::ldexp(1.0, -k));
                next.push_back(x + h0 * std::ldexp(1.0, -k));
            }
        }
        splits = interior_points(omega, next);
    }
    return sol;
}

}  // namespace

FluxSolution1D solve_flux_constant(const Problem1D& prob)
{
    if (!prob.coefficient)
        throw InvalidArgument("Problem1D: no coefficient");
    if (prob.coefficient->dim() != 1)
        throw InvalidArgument("Problem1D: the coefficient must be one-dimensional");
    if (!(prob.epsilon > 0.0 && prob.epsilon <= 1.0))
        throw InvalidArgument("Problem1D: epsilon must lie in (0, 1]");
    auto F = std::make_shared<const Antiderivative>(prob.rhs, prob.omega);
    auto coef = prob.coefficient;
    const double eps = prob.epsilon;
    auto a_of_x = [coef, eps](double x) { return coef->at(x / eps); };
    // nothing oscillates under a constant coefficient
    const bool flat = coef->periodic().is_constant() && !coef->has_defect();
    return solve_flux(F, a_of_x, prob.p(), prob.omega,
                      quadrature_cells(prob.quadrature, prob.omega, flat ? 0.0 : eps),
                      prob.quadrature.order, {0.0});
}

double homogenized_coefficient_1d(const PeriodicCoefficient& a_per, double p,
                                  const QuadratureSpec& q)
{
    if (a_per.dim() != 1)
        throw InvalidArgument("homogenized_coefficient_1d: one-dimensional coefficient required");
    if (!(p >= 2.0))
        throw InvalidArgument("homogenized_coefficient_1d: p must be >= 2");
    if (a_per.is_constant())
        return a_per(zero_vec(1));
    const double beta = 1.0 / (p - 1.0);
    const std::vector<double> splits{0.0};
    const CompositeRule rule({-0.5, 0.5}, std::max<std::size_t>(q.min_cells, 4096), splits,
                             q.order);
    Vec y(1);
    const double s = rule.integrate([&](double t) {
        y[0] = t;
        return std::pow(a_per(y), -beta);
    });
    return std::pow(s, -(p - 1.0));
}

FluxSolution1D solve_homogenized_1d(const Rhs& rhs, double a_star, double p, Interval omega,
                                    const QuadratureSpec& q)
{
    if (!(a_star > 0.0))
        throw InvalidArgument("solve_homogenized_1d: a* must be positive");
    if (!(p >= 2.0))
        throw InvalidArgument("solve_homogenized_1d: p must be >= 2");
    auto F = std::make_shared<const Antiderivative>(rhs, omega);
    return solve_flux(F, [a_star](double) { return a_star; }, p, omega,
                      quadrature_cells(q, omega, 0.0), q.order, {0.0});
}

// ---------------------------------------------------------------- correctors

const char* to_string(CorrectorKind kind)
{
    return kind == CorrectorKind::periodic ? "periodic" : "full";
}

double Corrector1D::grad(double y) const
{
    const double a = kind == CorrectorKind::periodic ? coefficient->periodic_at(make_vec({y}))
                                                     : coefficient->at(y);
    return xi * (std::pow(a_star / a, 1.0 / (p - 1.0)) - 1.0);
}

double Corrector1D::defect_grad(double y) const
{
    const Vec v = make_vec({y});
    const double beta = 1.0 / (p - 1.0);
    return xi * (std::pow(a_star / coefficient->at(y), beta) -
                 std::pow(a_star / coefficient->periodic_at(v), beta));
}

Corrector1D corrector_1d(double xi, std::shared_ptr<const Coefficient> c, CorrectorKind kind,
                         double a_star)
{
    if (!c || c->dim() != 1)
        throw InvalidArgument("corrector_1d: one-dimensional coefficient required");
    if (!(a_star > 0.0))
        throw InvalidArgument("corrector_1d: a* must be positive");
    Corrector1D w;
    w.xi = xi;
    w.kind = kind;
    w.a_star = a_star;
    w.p = c->p();
    w.coefficient = std::move(c);
    return w;
}

// ---------------------------------------------------------------- remainders

CompositeRule remainder_rule(const Problem1D& prob, const std::vector<double>& kinks)
{
    std::vector<double> pts = kinks;
    pts.push_back(0.0);
    return CompositeRule(prob.omega, quadrature_cells(prob.quadrature, prob.omega, prob.epsilon),
                         interior_points(prob.omega, pts), prob.quadrature.order);
}

std::vector<double> first_order_remainder(const FluxSolution1D& u_eps,
                                          const FluxSolution1D& u_star,
                                          const Corrector1D& unit, double epsilon,
                                          const CompositeRule& rule)
{
    std::vector<double> r(rule.size());
    for (std::size_t j = 0; j < rule.size(); ++j) {
        const double x = rule.nodes()[j];
        r[j] = u_eps.grad(x) - u_star.grad(x) * (1.0 + unit.grad(x / epsilon));
    }
    return r;
}

namespace {

// eps * w_1(x/eps) = int_0^x w_1'(t/eps) dt at the nodes of rule.
std::vector<double> scaled_corrector(const Corrector1D& unit, double epsilon,
                                     const CompositeRule& rule, const QuadratureSpec& q)
{
    auto g = [&](double t) { return unit.grad(t / epsilon); };
    const Interval dom = rule.domain();
    if (dom.lo <= 0.0 && 0.0 <= dom.hi)
        return rule.primitive_at_nodes(g, 0.0);
    auto w = rule.primitive_at_nodes(g, dom.lo);
    const Interval gap{std::min(0.0, dom.lo), std::max(0.0, dom.lo)};
    const CompositeRule between(gap, quadrature_cells(q, gap, epsilon), {}, q.order);
    double offset = between.integrate(g);
    if (dom.lo < 0.0)
        offset = -offset;
    for (double& v : w)
        v += offset;
    return w;
}

}  // namespace

RemainderReport remainder_report(const Problem1D& prob)
{
    RemainderReport rep;
    rep.epsilon = prob.epsilon;
    const double p = prob.p();
    const double beta = 1.0 / (p - 1.0);

    const FluxSolution1D u_eps = solve_flux_constant(prob);
    rep.a_star = homogenized_coefficient_1d(prob.coefficient->periodic(), p, prob.quadrature);
    const FluxSolution1D u_star =
        solve_homogenized_1d(prob.rhs, rep.a_star, p, prob.omega, prob.quadrature);
    rep.C_eps = u_eps.C;
    rep.C_star = u_star.C;
    rep.singular_points = u_star.sign_changes;

    std::vector<double> kinks = u_eps.sign_changes;
    kinks.insert(kinks.end(), u_star.sign_changes.begin(), u_star.sign_changes.end());
    const CompositeRule rule = remainder_rule(prob, kinks);
    rep.quadrature_nodes = rule.size();

    // (u*)'' = beta |z|^{beta-1} (-f) / a*,  z = (-F + C*) / a*
    std::vector<double> u_star_2(rule.size());
    for (std::size_t j = 0; j < rule.size(); ++j) {
        const double x = rule.nodes()[j];
        const double z = u_star.flux(x) / rep.a_star;
        u_star_2[j] = z == 0.0 ? 0.0
                               : beta * std::pow(std::abs(z), beta - 1.0) *
                                     (-u_star.F->f(x)) / rep.a_star;
    }

    for (CorrectorKind kind : {CorrectorKind::periodic, CorrectorKind::full}) {
        const Corrector1D unit = corrector_1d(1.0, prob.coefficient, kind, rep.a_star);
        const auto r1 = first_order_remainder(u_eps, u_star, unit, prob.epsilon, rule);
        auto w = scaled_corrector(unit, prob.epsilon, rule, prob.quadrature);
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] *= u_star_2[j];
        RemainderNorms& n = kind == CorrectorKind::periodic ? rep.periodic : rep.full;
        n.linf = linf_norm(r1);
        n.l2 = lq_norm(rule, r1, 2.0);
        n.second_order_l1 = lq_norm(rule, w, 1.0);
    }

    if (p > 2.0 && !rep.singular_points.empty()) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "(u*)'' is singular at x =";
        for (double x : rep.singular_points)
            msg << ' ' << x;
        msg << "; the second-order term is reported in L^1 only";
        rep.warnings.push_back(msg.str());
    }
    return rep;
}

std::vector<RemainderReport> table_sweep(const Problem1D& prob_template,
                                         const std::vector<double>& eps_list, unsigned threads)
{
    if (eps_list.empty())
        throw InvalidArgument("table_sweep: empty eps list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0))
            throw InvalidArgument("table_sweep: every eps must lie in (0, 1]");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw InvalidArgument("table_sweep: eps list must be strictly decreasing");
    }
    return parallel_map<RemainderReport>(eps_list.size(), threads, [&](std::size_t i) {
        Problem1D prob = prob_template;
        prob.epsilon = eps_list[i];
        return remainder_report(prob);
    });
}

}  // namespace phom
