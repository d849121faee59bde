#include "phom/homog.hpp"

#include "phom/errors.hpp"
#include "phom/parallel.hpp"
#include "phom/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phom {

double Box::measure() const
{
    double m = 1.0;
    for (int i = 0; i < dim(); ++i)
        m *= hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
    return m;
}

bool Box::contains(const Vec& x) const
{
    for (int i = 0; i < dim(); ++i)
        if (x[i] < lo[static_cast<std::size_t>(i)] || x[i] > hi[static_cast<std::size_t>(i)])
            return false;
    return true;
}

namespace {

constexpr double kSnap = 1e-9;

void check_box(const Box& omega)
{
    if (omega.dim() < 1 || omega.dim() > 2 || omega.hi.size() != omega.lo.size())
        throw InvalidArgument("homog: Omega must be an interval or a 2D box");
    for (int i = 0; i < omega.dim(); ++i)
        if (!(omega.hi[static_cast<std::size_t>(i)] > omega.lo[static_cast<std::size_t>(i)]))
            throw InvalidArgument("homog: empty Omega");
}

// Integral of g over the box [lo, hi] by tensor Gauss-Legendre on sub x sub sub-boxes.
template <class G>
double integrate_box(G&& g, const Vec& lo, const Vec& hi, int order, int sub)
{
    const GaussRule& rule = gauss_legendre(order);
    const int d = static_cast<int>(lo.size());
    const std::size_t q = rule.nodes.size();
    // 1D node/weight tables per axis
    std::vector<std::vector<double>> xs(static_cast<std::size_t>(d)), ws(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        const double h = (hi[k] - lo[k]) / sub;
        for (int s = 0; s < sub; ++s) {
            const double a = lo[k] + s * h;
            for (std::size_t j = 0; j < q; ++j) {
                xs[static_cast<std::size_t>(k)].push_back(a + 0.5 * h * (rule.nodes[j] + 1.0));
                ws[static_cast<std::size_t>(k)].push_back(0.5 * h * rule.weights[j]);
            }
        }
    }
    double total = 0.0;
    Vec x(d);
    if (d == 1) {
        for (std::size_t i = 0; i < xs[0].size(); ++i) {
            x[0] = xs[0][i];
            total += ws[0][i] * g(x);
        }
        return total;
    }
    for (std::size_t i = 0; i < xs[0].size(); ++i)
        for (std::size_t j = 0; j < xs[1].size(); ++j) {
            x[0] = xs[0][i];
            x[1] = xs[1][j];
            total += ws[0][i] * ws[1][j] * g(x);
        }
    return total;
}

// Per-axis partition of Omega into slivers and covered cells.
std::vector<double> axis_breaks(double lo, double hi, double delta, long k_lo, long count)
{
    std::vector<double> b{lo};
    for (long k = k_lo; k <= k_lo + count; ++k) {
        const double x = delta * (static_cast<double>(k) - 0.5);
        if (x > b.back() + kSnap * delta && x < hi - kSnap * delta)
            b.push_back(x);
    }
    b.push_back(hi);
    return b;
}

// Calls fn(lo, hi, covered) on every panel of the Omega partition.
template <class Fn>
void for_each_panel(const StepFunction& m, Fn&& fn)
{
    const Box& om = m.omega();
    const int d = om.dim();
    std::vector<std::vector<double>> breaks;
    std::vector<std::vector<bool>> inside;
    for (int k = 0; k < d; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double dl = m.delta();
        const long k_lo = static_cast<long>(std::ceil(om.lo[ks] / dl + 0.5 - kSnap));
        const long k_hi = static_cast<long>(std::floor(om.hi[ks] / dl - 0.5 + kSnap));
        breaks.push_back(axis_breaks(om.lo[ks], om.hi[ks], dl, k_lo, std::max(0L, k_hi - k_lo + 1)));
        std::vector<bool> in;
        for (std::size_t i = 0; i + 1 < breaks.back().size(); ++i) {
            const double a = breaks.back()[i], b = breaks.back()[i + 1];
            const double mid = 0.5 * (a + b);
            const long kk = static_cast<long>(std::floor(mid / dl + 0.5));
            in.push_back(k_hi >= k_lo && kk >= k_lo && kk <= k_hi);
        }
        inside.push_back(std::move(in));
    }
    if (d == 1) {
        for (std::size_t i = 0; i + 1 < breaks[0].size(); ++i)
            fn(make_vec({breaks[0][i]}), make_vec({breaks[0][i + 1]}), bool(inside[0][i]));
        return;
    }
    for (std::size_t i = 0; i + 1 < breaks[0].size(); ++i)
        for (std::size_t j = 0; j + 1 < breaks[1].size(); ++j)
            fn(make_vec({breaks[0][i], breaks[1][j]}), make_vec({breaks[0][i + 1], breaks[1][j + 1]}),
               inside[0][i] && inside[1][j]);
}

}  // namespace

StepFunction::StepFunction(Box omega, double delta, int value_dim)
    : omega_(std::move(omega)), delta_(delta), value_dim_(value_dim)
{
    check_box(omega_);
    if (!(delta > 0.0))
        throw InvalidArgument("discretize: delta must be positive");
    std::size_t total = 1;
    for (int k = 0; k < omega_.dim(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        // delta (k - 1/2) >= lo and delta (k + 1/2) <= hi
        const long lo = static_cast<long>(std::ceil(omega_.lo[ks] / delta + 0.5 - kSnap));
        const long hi = static_cast<long>(std::floor(omega_.hi[ks] / delta - 0.5 + kSnap));
        k_lo_.push_back(lo);
        counts_.push_back(std::max(0L, hi - lo + 1));
        total *= static_cast<std::size_t>(counts_.back());
    }
    values_.assign(total, zero_vec(value_dim));
}

double StepFunction::covered_measure() const
{
    return static_cast<double>(values_.size()) * std::pow(delta_, dim());
}

std::vector<long> StepFunction::index(std::size_t i) const
{
    std::vector<long> k(static_cast<std::size_t>(dim()));
    for (int a = dim() - 1; a >= 0; --a) {
        const auto as = static_cast<std::size_t>(a);
        k[as] = k_lo_[as] + static_cast<long>(i % static_cast<std::size_t>(counts_[as]));
        i /= static_cast<std::size_t>(counts_[as]);
    }
    return k;
}

Vec StepFunction::centre(std::size_t i) const
{
    const auto k = index(i);
    Vec c(dim());
    for (int a = 0; a < dim(); ++a)
        c[a] = delta_ * static_cast<double>(k[static_cast<std::size_t>(a)]);
    return c;
}

std::optional<std::size_t> StepFunction::cell_of(const Vec& x) const
{
    if (values_.empty() || x.size() != dim())
        return std::nullopt;
    std::size_t cell = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto as = static_cast<std::size_t>(a);
        const long k = static_cast<long>(std::floor(x[a] / delta_ + 0.5));
        const long off = k - k_lo_[as];
        if (off < 0 || off >= counts_[as])
            return std::nullopt;
        cell = cell * static_cast<std::size_t>(counts_[as]) + static_cast<std::size_t>(off);
    }
    return cell;
}

Vec StepFunction::operator()(const Vec& x) const
{
    const auto c = cell_of(x);
    return c ? values_[*c] : zero_vec(value_dim_);
}

StepFunction discretize(const Field& phi, const Box& omega, double delta, int value_dim,
                        const DiscretizeOptions& options)
{
    StepFunction m(omega, delta, value_dim);
    const double vol = std::pow(delta, omega.dim());
    for (std::size_t i = 0; i < m.num_cells(); ++i) {
        const Vec c = m.centre(i);
        const Vec lo = c.array() - 0.5 * delta, hi = c.array() + 0.5 * delta;
        Vec mean(value_dim);
        for (int v = 0; v < value_dim; ++v)
            mean[v] = integrate_box([&](const Vec& x) { return phi(x)[v]; }, lo, hi, options.order,
                                    options.subdivisions) /
                      vol;
        m.value(i) = mean;
    }
    return m;
}

StepFunction discretize(const std::function<double(double)>& phi, double lo, double hi,
                        double delta, const DiscretizeOptions& options)
{
    return discretize([&](const Vec& x) { return make_vec({phi(x[0])}); }, Box::interval(lo, hi),
                      delta, 1, options);
}

double step_error(const Field& phi, const StepFunction& m, double p, bool covered_only,
                  const DiscretizeOptions& options)
{
    double s = 0.0;
    for_each_panel(m, [&](const Vec& lo, const Vec& hi, bool covered) {
        if (covered_only && !covered)
            return;
        s += integrate_box([&](const Vec& x) { return abs_power((m(x) - phi(x)).norm(), p); }, lo,
                           hi, options.order, options.subdivisions);
    });
    return std::pow(s, 1.0 / p);
}

std::vector<OrderEntry> discretization_orders(const Field& phi, const Box& omega,
                                              const std::vector<double>& deltas, double p,
                                              int value_dim)
{
    std::vector<OrderEntry> out;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (i > 0 && !(deltas[i] < deltas[i - 1]))
            throw InvalidArgument("discretization_orders: deltas must be decreasing");
        const StepFunction m = discretize(phi, omega, deltas[i], value_dim);
        OrderEntry e;
        e.delta = deltas[i];
        e.error_covered = step_error(phi, m, p, true);
        e.error_full = step_error(phi, m, p, false);
        if (i > 0) {
            const double r = std::log(deltas[i - 1] / deltas[i]);
            e.order_covered = std::log(out.back().error_covered / e.error_covered) / r;
            e.order_full = std::log(out.back().error_full / e.error_full) / r;
        }
        out.push_back(e);
    }
    return out;
}

JensenReport jensen_check(const Field& phi, const Box& omega, const std::vector<double>& deltas,
                          double p, int value_dim)
{
    JensenReport rep;
    for (double delta : deltas) {
        const StepFunction m = discretize(phi, omega, delta, value_dim);
        JensenEntry e;
        e.delta = delta;
        const double vol = std::pow(delta, omega.dim());
        for (std::size_t i = 0; i < m.num_cells(); ++i)
            e.lhs += vol * abs_power(m.value(i).norm(), p);
        for_each_panel(m, [&](const Vec& lo, const Vec& hi, bool) {
            e.rhs += integrate_box([&](const Vec& x) { return abs_power(phi(x).norm(), p); }, lo, hi,
                                   8, 64);
        });
        e.holds = e.lhs <= e.rhs + 1e-10 * std::max(1.0, e.rhs);
        rep.holds = rep.holds && e.holds;
        rep.entries.push_back(e);
    }
    return rep;
}

std::function<double(double)> random_piecewise(double lo, double hi, int pieces, std::uint64_t seed)
{
    if (pieces < 1 || !(hi > lo))
        throw InvalidArgument("random_piecewise: need pieces >= 1 and lo < hi");
    const CounterRng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(pieces));
    for (int i = 0; i < pieces; ++i)
        v[static_cast<std::size_t>(i)] = rng.uniform(static_cast<std::uint64_t>(i), 0, -2.0, 2.0);
    return [v, lo, hi](double x) {
        const double t = (x - lo) / (hi - lo) * static_cast<double>(v.size());
        const auto i = static_cast<std::size_t>(
            std::clamp(std::floor(t), 0.0, static_cast<double>(v.size() - 1)));
        return v[i];
    };
}

// corrector bank

std::shared_ptr<CorrectorBank> CorrectorBank::closed_form_1d(std::shared_ptr<const Coefficient> c,
                                                             CorrectorKind kind, double a_star)
{
    if (!c || c->dim() != 1)
        throw InvalidArgument("CorrectorBank: the closed form is one-dimensional");
    std::shared_ptr<CorrectorBank> b(new CorrectorBank());
    b->kind_ = kind;
    b->dim_ = 1;
    b->coefficient_ = std::move(c);
    b->a_star_1d_ = a_star;
    return b;
}

std::shared_ptr<CorrectorBank> CorrectorBank::solved(const DefectSetup& setup, CorrectorKind kind,
                                                     int solve_budget)
{
    if (!setup.coefficient)
        throw InvalidArgument("CorrectorBank: no coefficient");
    std::shared_ptr<CorrectorBank> b(new CorrectorBank());
    b->kind_ = kind;
    b->dim_ = setup.coefficient->dim();
    b->coefficient_ = setup.coefficient;
    b->setup_ = setup;
    b->budget_ = solve_budget;
    return b;
}

std::pair<Vec, double> CorrectorBank::canonical(const Vec& eta) const
{
    const double n = eta.norm();
    Vec dir = eta / n;
    double sign = 1.0;
    for (int i = 0; i < dir.size(); ++i) {
        if (std::abs(dir[i]) < 1e-12)
            continue;
        if (dir[i] < 0.0)
            sign = -1.0;
        break;
    }
    dir *= sign;
    // round so that nearby directions share one deterministic solve
    for (int i = 0; i < dir.size(); ++i)
        dir[i] = std::round(dir[i] * 1e12) / 1e12;
    dir.normalize();
    return {dir, sign * n};
}

std::shared_ptr<const CorrectorBank::Entry> CorrectorBank::build(const Vec& direction) const
{
    auto e = std::make_shared<Entry>();
    e->direction = direction;
    if (a_star_1d_) {
        const Corrector1D unit = corrector_1d(direction[0], coefficient_, kind_, *a_star_1d_);
        e->unit_grad = [unit](const Vec& y) { return make_vec({unit.grad(y[0])}); };
        return e;
    }
    const GradientSource src = periodic_gradient(*setup_, direction);
    if (kind_ == CorrectorKind::periodic) {
        e->unit_grad = [src](const Vec& y) -> Vec { return src.eval(y) - src.xi; };
        return e;
    }
    auto solve = std::make_shared<const DefectSolve>(solve_defect(src, *setup_));
    const StructuredGrid lattice = setup_->domain.lattice();
    const double R = setup_->domain.R;
    e->unit_grad = [src, solve, lattice, R](const Vec& y) -> Vec {
        Vec g = src.eval(y) - src.xi;
        const int n = lattice.cells_per_axis();
        std::size_t cell = 0;
        for (int k = 0; k < y.size(); ++k) {
            if (!(std::abs(y[k]) < R))
                return g;
            const int i = std::clamp(static_cast<int>(std::floor((y[k] + R) / lattice.spacing())), 0,
                                     n - 1);
            cell = cell * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
        }
        return g + solve->gradient[cell];
    };
    return e;
}

std::shared_ptr<const CorrectorBank::Entry> CorrectorBank::entry(const Vec& direction) const
{
    const std::vector<double> key(direction.data(), direction.data() + direction.size());
    {
        std::shared_lock lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
    }
    std::unique_lock lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end())
        return it->second;
    if (!a_star_1d_) {
        if (solves_ >= budget_)
            throw MissingCorrector("corrector bank: no entry for a new direction and the solve "
                                   "budget is exhausted");
        ++solves_;
    }
    auto e = build(direction);
    cache_.emplace(key, e);
    return e;
}

Vec CorrectorBank::gradient(const Vec& eta, const Vec& y) const
{
    if (eta.size() != dim_ || y.size() != dim_)
        throw InvalidArgument("CorrectorBank: dimension mismatch");
    if (eta.norm() == 0.0)
        return zero_vec(dim_);
    const auto [dir, scale] = canonical(eta);
    return scale * entry(dir)->unit_grad(y);
}

void CorrectorBank::prepare(const Vec& eta) const
{
    if (eta.norm() > 0.0)
        entry(canonical(eta).first);
}

std::size_t CorrectorBank::cached() const
{
    std::shared_lock lock(mutex_);
    return cache_.size();
}

int CorrectorBank::solves() const
{
    std::shared_lock lock(mutex_);
    return solves_;
}

Field two_scale_field(const Field& u_star_grad, const StepFunction& m,
                      std::shared_ptr<const CorrectorBank> bank, double eps, CorrectorKind kind)
{
    if (!bank)
        throw InvalidArgument("two_scale_field: no corrector bank");
    if (bank->kind() != kind)
        throw InvalidArgument(std::string("two_scale_field: bank holds ") + to_string(bank->kind()) +
                              " correctors, requested " + to_string(kind));
    if (!(eps > 0.0))
        throw InvalidArgument("two_scale_field: eps must be positive");
    for (std::size_t i = 0; i < m.num_cells(); ++i)
        bank->prepare(m.value(i));
    return [u_star_grad, m, bank, eps](const Vec& x) -> Vec {
        Vec g = u_star_grad(x);
        if (const auto c = m.cell_of(x))
            g += bank->gradient(m.value(*c), x / eps);
        return g;
    };
}

ConvergenceSeries convergence_study(const Problem1D& prob_template,
                                    const std::vector<double>& eps_list, CorrectorKind kind,
                                    double nu, unsigned threads)
{
    if (!prob_template.coefficient || prob_template.coefficient->dim() != 1)
        throw InvalidArgument("convergence_study: one-dimensional problems only");
    if (!(nu > 0.0 && nu <= 1.0))
        throw InvalidArgument("convergence_study: nu must lie in (0, 1]");
    if (eps_list.empty())
        throw InvalidArgument("convergence_study: empty eps list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0))
            throw InvalidArgument("convergence_study: every eps must lie in (0, 1]");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw InvalidArgument("convergence_study: eps list must be strictly decreasing");
    }

    const double p = prob_template.p();
    const Interval omega = prob_template.omega;
    ConvergenceSeries series;
    series.kind = kind;
    series.nu = nu;
    series.a_star =
        homogenized_coefficient_1d(prob_template.coefficient->periodic(), p, prob_template.quadrature);
    const FluxSolution1D u_star = solve_homogenized_1d(prob_template.rhs, series.a_star, p, omega,
                                                       prob_template.quadrature);
    series.C_star = u_star.C;
    const auto bank = CorrectorBank::closed_form_1d(prob_template.coefficient, kind, series.a_star);
    const Corrector1D unit = corrector_1d(1.0, prob_template.coefficient, kind, series.a_star);
    const Field u_star_grad = [&u_star](const Vec& x) { return make_vec({u_star.grad(x[0])}); };

    series.records = parallel_map<ConvergenceRecord>(eps_list.size(), threads, [&](std::size_t i) {
        Problem1D prob = prob_template;
        prob.epsilon = eps_list[i];
        ConvergenceRecord r;
        r.eps = prob.epsilon;
        r.delta = std::pow(prob.epsilon, nu);
        const FluxSolution1D u_eps = solve_flux_constant(prob);
        r.C_eps = u_eps.C;

        const StepFunction m =
            discretize(u_star_grad, Box::interval(omega.lo, omega.hi), r.delta, 1);
        std::vector<double> kinks = u_eps.sign_changes;
        kinks.insert(kinks.end(), u_star.sign_changes.begin(), u_star.sign_changes.end());
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
            kinks.push_back(m.centre(c)[0] - 0.5 * r.delta);
            kinks.push_back(m.centre(c)[0] + 0.5 * r.delta);
        }
        const CompositeRule rule = remainder_rule(prob, kinks);

        const auto ge = [&u_eps](double x) { return u_eps.grad(x); };
        const auto gs = [&u_star](double x) { return u_star.grad(x); };
        const auto ue = rule.primitive_at_nodes(ge, omega.lo);
        const auto us = rule.primitive_at_nodes(gs, omega.lo);
        std::vector<double> du(rule.size()), dflux(rule.size()), two(rule.size());
        const Field field = two_scale_field(u_star_grad, m, bank, prob.epsilon, kind);
        for (std::size_t j = 0; j < rule.size(); ++j) {
            const double x = rule.nodes()[j];
            du[j] = ue[j] - us[j];
            const double ve = u_eps.grad(x), vs = u_star.grad(x);
            dflux[j] = u_eps.a_of_x(x) * signed_power(ve, p - 1.0) -
                       series.a_star * signed_power(vs, p - 1.0);
            two[j] = ve - field(make_vec({x}))[0];
        }
        r.Lp_u_err = lq_norm(rule, du, p);
        r.L2_u_err = lq_norm(rule, du, 2.0);
        r.flux_res_1 = std::abs(rule.integrate_samples(dflux));
        std::vector<double> tmp(rule.size());
        for (std::size_t j = 0; j < rule.size(); ++j)
            tmp[j] = dflux[j] * rule.nodes()[j];
        r.flux_res_x = std::abs(rule.integrate_samples(tmp));
        for (std::size_t j = 0; j < rule.size(); ++j)
            tmp[j] = dflux[j] * std::sin(std::numbers::pi * rule.nodes()[j]);
        r.flux_res_sin = std::abs(rule.integrate_samples(tmp));

        const auto rem = first_order_remainder(u_eps, u_star, unit, prob.epsilon, rule);
        r.R_Linf = linf_norm(rem);
        r.R_L2 = lq_norm(rule, rem, 2.0);
        r.two_scale_Lp = lq_norm(rule, two, p);
        return r;
    });
    return series;
}

}  // namespace phom
