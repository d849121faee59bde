#include "phom/defect.hpp"

#include "phom/errors.hpp"
#include "phom/oned.hpp"
#include "phom/parallel.hpp"
#include "phom/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace phom {

const char* to_string(Truncation t)
{
    return t == Truncation::natural ? "natural" : "dirichlet";
}

StructuredGrid TruncatedDomain::lattice() const
{
    if (dim < 1 || dim > 3)
        throw InvalidArgument("TruncatedDomain: dimension must be 1, 2 or 3");
    if (!(R > 0.0))
        throw InvalidArgument("TruncatedDomain: R must be positive");
    if (nodes_per_unit < 16)
        throw InvalidArgument("TruncatedDomain: at least 16 nodes per unit cell are required");
    const double cells = 2.0 * R * nodes_per_unit;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * cells)
        throw InvalidArgument("TruncatedDomain: 2 R nodes_per_unit must be an integer");
    return StructuredGrid(dim, static_cast<int>(rounded), 1.0 / nodes_per_unit, -R, false);
}

int default_defect_nodes_per_unit(int dim) { return dim == 1 ? 128 : 16; }

double default_truncation_radius(const Coefficient& c)
{
    const double decay = c.defect() ? c.defect()->decay_radius() : 0.0;
    return std::ceil(decay) + 16.0;
}

// ---------------------------------------------------------------- sources

GradientSource GradientSource::from_cell(std::shared_ptr<const CellSolve> cell)
{
    if (!cell)
        throw InvalidArgument("GradientSource: no cell solve");
    GradientSource s;
    s.xi = cell->xi;
    s.eval = [cell](const Vec& y) { return cell->corrected_gradient(y); };
    std::ostringstream o;
    o << "cell solve (n = " << cell->field.grid.n() << ")";
    s.origin = o.str();
    return s;
}

GradientSource GradientSource::closed_form_1d(double xi, const PeriodicCoefficient& a_per,
                                              double p, double a_star)
{
    if (a_per.dim() != 1)
        throw InvalidArgument("GradientSource: the closed form is one-dimensional");
    GradientSource s;
    s.xi = make_vec({xi});
    const double beta = 1.0 / (p - 1.0);
    s.eval = [a_per, xi, beta, a_star](const Vec& y) {
        return make_vec({xi * std::pow(a_star / a_per(y), beta)});
    };
    s.origin = "closed form";
    return s;
}

GradientSource periodic_gradient(const DefectSetup& setup, const Vec& xi)
{
    const Coefficient& c = *setup.coefficient;
    if (c.dim() == 1 && setup.use_closed_form_1d)
        return GradientSource::closed_form_1d(xi[0], c.periodic(), c.p(),
                                              homogenized_coefficient_1d(c.periodic(), c.p()));
    return GradientSource::from_cell(
        std::make_shared<const CellSolve>(solve_cell(xi, c.periodic(), c.p(), setup.cell)));
}

CellTerms assemble_terms(const Coefficient& c, const GradientSource& u,
                         const StructuredGrid& lattice)
{
    CellTerms t;
    t.subtract_linearization = true;
    const std::size_t n = lattice.num_cells();
    t.a.resize(n);
    t.base.resize(n);
    t.linear.resize(n);
    const double p = c.p();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec y = lattice.sample_point(k);
        t.a[k] = c(y);
        t.base[k] = u.eval(y);
        t.linear[k] = c.defect_at(y) * abs_power(t.base[k].norm(), p - 2.0) * t.base[k];
    }
    return t;
}

// ---------------------------------------------------------------- norms

std::vector<Annulus> annulus_table(const StructuredGrid& lattice, const std::vector<Vec>& grad,
                                   const std::vector<double>& weight, double p)
{
    const double R = -lattice.node_origin();
    std::vector<Annulus> table{{0.0, std::min(1.0, R)}};
    while (table.back().outer < R)
        table.push_back({table.back().outer, std::min(2.0 * table.back().outer, R)});
    const double vol = lattice.cell_volume();
    const double pp = p / (p - 1.0);
    for (std::size_t c = 0; c < grad.size(); ++c) {
        const double r = lattice.sample_point(c).cwiseAbs().maxCoeff();
        std::size_t k = r < 1.0 ? 0 : static_cast<std::size_t>(std::floor(std::log2(r))) + 1;
        k = std::min(k, table.size() - 1);
        const double g = grad[c].norm();
        table[k].grad_p += vol * abs_power(g, p);
        table[k].grad_p_prime += vol * abs_power(g, pp);
        table[k].weighted += vol * weight[c] * g * g;
    }
    return table;
}

DefectNorms defect_norms(const StructuredGrid& lattice, const std::vector<Vec>& grad,
                         const std::vector<double>& weight, const std::vector<Vec>& h, double p)
{
    const double vol = lattice.cell_volume();
    const double pp = p / (p - 1.0);
    double sp = 0.0, sw = 0.0, spp = 0.0, sh = 0.0;
    for (std::size_t c = 0; c < grad.size(); ++c) {
        const double g = grad[c].norm();
        sp += abs_power(g, p);
        sw += weight[c] * g * g;
        spp += abs_power(g, pp);
        if (!h.empty())
            sh += abs_power(h[c].norm(), pp);
    }
    DefectNorms n;
    n.lp = std::pow(sp * vol, 1.0 / p);
    n.weighted_l2 = std::sqrt(sw * vol);
    n.wu = n.lp + n.weighted_l2;
    n.lp_prime = std::pow(spp * vol, 1.0 / pp);
    n.h_lp_prime = std::pow(sh * vol, 1.0 / pp);
    double ap = 0.0, aw = 0.0;
    for (const Annulus& a : annulus_table(lattice, grad, weight, p)) {
        ap += a.grad_p;
        aw += a.weighted;
    }
    n.wu_from_annuli = std::pow(ap, 1.0 / p) + std::sqrt(aw);
    return n;
}

double defect_energy(const Coefficient& c, const GradientSource& u, const TruncatedDomain& domain,
                     const Eigen::VectorXd& v)
{
    const StructuredGrid lattice = domain.lattice();
    const GridEnergy e(lattice, c.p(), assemble_terms(c, u, lattice));
    return e.value(v);
}

// ---------------------------------------------------------------- solve

namespace {

std::vector<Vec> cell_gradients(const GridEnergy& e, const Eigen::VectorXd& v)
{
    std::vector<Vec> g(e.grid().num_cells());
    for (std::size_t c = 0; c < g.size(); ++c)
        g[c] = e.discrete_gradient(v, c);
    return g;
}

}  // namespace

DefectSolve solve_defect(const Vec& xi, const DefectSetup& setup)
{
    return solve_defect(periodic_gradient(setup, xi), setup);
}

DefectSolve solve_defect(const GradientSource& u, const DefectSetup& setup)
{
    if (!setup.coefficient)
        throw InvalidArgument("solve_defect: no coefficient");
    const Coefficient& c = *setup.coefficient;
    if (setup.domain.dim != c.dim() || u.xi.size() != c.dim())
        throw InvalidArgument("solve_defect: dimension mismatch");
    const double p = c.p();
    const StructuredGrid lattice = setup.domain.lattice();
    CellTerms terms = assemble_terms(c, u, lattice);

    DefectSolve s;
    s.xi = u.xi;
    s.p = p;
    s.domain = setup.domain;
    s.u = terms.base;
    s.h = terms.linear;
    s.weight.resize(s.u.size());
    for (std::size_t k = 0; k < s.u.size(); ++k)
        s.weight[k] = abs_power(s.u[k].norm(), p - 2.0);
    s.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lattice.num_nodes()));

    const GridEnergy energy(lattice, p, std::move(terms));
    if (u.xi.norm() > 0.0) {
        const Constraints cons =
            make_constraints(lattice, setup.domain.boundary == Truncation::dirichlet);
        MinimizeResult r = minimize(energy, cons, s.values, setup.minimize);
        if (!r.converged)
            throw NoConvergence("defect", r.iterations, r.residual);
        s.values = std::move(r.v);
        s.energy = energy.value(s.values);
        s.residual = r.residual;
        s.iterations = r.iterations;
        s.energy_trace = std::move(r.energy_trace);
    } else {
        s.energy_trace.push_back(0.0);
    }
    s.gradient = cell_gradients(energy, s.values);
    s.norms = defect_norms(lattice, s.gradient, s.weight, s.h, p);
    s.annuli = annulus_table(lattice, s.gradient, s.weight, p);
    double total = 0.0;
    for (const Annulus& a : s.annuli)
        total += a.grad_p;
    s.truncation_share = total > 0.0 ? s.annuli.back().grad_p / total : 0.0;
    if (s.truncation_share > 0.05) {
        std::ostringstream w;
        w << "truncation: outermost annulus holds " << 100.0 * s.truncation_share
          << "% of the L^p energy; increase R";
        s.warnings.push_back(w.str());
    }
    return s;
}

// ---------------------------------------------------------------- reports

double TailReport::max_ratio_beyond(double from) const
{
    double m = 0.0;
    for (std::size_t k = 0; k < tail_ratios.size(); ++k)
        if (annuli[k].inner >= from)
            m = std::max(m, tail_ratios[k]);
    return m;
}

TailReport integrability_report(const DefectSolve& solve)
{
    TailReport t;
    t.annuli = solve.annuli;
    double run = 0.0;
    for (std::size_t k = 0; k < t.annuli.size(); ++k) {
        run += t.annuli[k].grad_p_prime;
        t.cumulative.push_back(run);
        if (k + 1 < t.annuli.size()) {
            const double cur = t.annuli[k].grad_p_prime;
            t.tail_ratios.push_back(cur > 0.0 ? t.annuli[k + 1].grad_p_prime / cur : 0.0);
        }
    }
    const double nxi = solve.xi.norm();
    t.lp_prime_over_xi = nxi > 0.0 ? solve.norms.lp_prime / nxi : 0.0;
    return t;
}

std::vector<Vec> seeded_bases(int dim, int count, std::uint64_t seed)
{
    const CounterRng rng(seed);
    std::vector<Vec> out;
    for (int k = 0; k < count; ++k) {
        const auto idx = static_cast<std::uint64_t>(k);
        Vec dir(dim);
        for (int i = 0; i < dim; ++i)
            dir[i] = rng.uniform(idx, static_cast<std::uint64_t>(i), -1.0, 1.0);
        if (dir.norm() == 0.0)
            dir = unit_vec(dim, 0);
        const double r = std::pow(2.0, rng.uniform(idx, 8, -1.0, 1.0));
        out.push_back(r * dir.normalized());
    }
    return out;
}

ContinuityReport continuity_scan(const DefectSetup& setup, const std::vector<Vec>& bases,
                                 const std::vector<double>& gaps, double gamma_est,
                                 unsigned threads)
{
    const Coefficient& c = *setup.coefficient;
    const double p = c.p();
    ContinuityReport rep;
    rep.gamma_est = gamma_est;
    rep.beta_tilde = gamma_est / (p - 1.0) * std::min(1.0, p - 2.0);
    const Vec e = Vec::Ones(c.dim()).normalized();

    std::vector<Vec> xis;
    for (const Vec& b : bases) {
        xis.push_back(b);
        for (double r : gaps)
            xis.push_back(b + r * e);
    }
    const auto solves = parallel_map<DefectSolve>(
        xis.size(), threads, [&](std::size_t i) { return solve_defect(xis[i], setup); });

    const StructuredGrid lattice = setup.domain.lattice();
    const double vol = lattice.cell_volume();
    const double bt = rep.beta_tilde;
    std::size_t at = 0;
    for (std::size_t b = 0; b < bases.size(); ++b) {
        const DefectSolve& sx = solves[at++];
        double first = -1.0, worst = 0.0;
        for (std::size_t g = 0; g < gaps.size(); ++g) {
            const DefectSolve& se = solves[at++];
            ContinuityEntry entry{sx.xi, se.xi, (sx.xi - se.xi).norm()};
            if (entry.gap <= 1e-9)
                continue;
            double s = 0.0;
            for (std::size_t k = 0; k < sx.gradient.size(); ++k)
                s += abs_power((sx.gradient[k] - se.gradient[k]).norm(), p);
            entry.numerator = std::pow(s * vol, 1.0 / p);
            const double den = (std::pow(entry.xi.norm(), 1.0 - bt) +
                                std::pow(entry.eta.norm(), 1.0 - bt)) *
                               std::pow(entry.gap, bt);
            entry.ratio = entry.numerator / den;
            rep.max_ratio = std::max(rep.max_ratio, entry.ratio);
            if (first < 0.0)
                first = entry.ratio;
            worst = std::max(worst, entry.ratio);
            rep.entries.push_back(entry);
        }
        if (first > 0.0)
            rep.growth = std::max(rep.growth, worst / first);
    }
    rep.bounded = rep.growth <= 2.0;
    return rep;
}

CoercivityReport coercivity_check(const DefectSolve& solve, const DefectSetup& setup,
                                  const GradientSource& u, int count, std::uint64_t seed,
                                  double g_lower, double g_upper)
{
    const Coefficient& c = *setup.coefficient;
    const double p = c.p();
    const double pp = p / (p - 1.0);
    const double lambda = c.lambda();
    const StructuredGrid lattice = setup.domain.lattice();
    const GridEnergy energy(lattice, p, assemble_terms(c, u, lattice));
    const double R = setup.domain.R;

    std::vector<Eigen::VectorXd> fields{solve.values};
    const CounterRng rng(seed);
    for (int k = 0; k < count; ++k) {
        const auto idx = static_cast<std::uint64_t>(k);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lattice.num_nodes()));
        for (int bump = 0; bump < 3; ++bump) {
            const auto lane = static_cast<std::uint64_t>(16 * bump);
            Vec centre(lattice.dim());
            for (int i = 0; i < lattice.dim(); ++i)
                centre[i] = rng.uniform(idx, lane + static_cast<std::uint64_t>(i), -R / 2, R / 2);
            const double width = std::pow(10.0, rng.uniform(idx, lane + 4, -0.3, 0.7));
            const double amp = std::pow(10.0, rng.uniform(idx, lane + 5, -2.0, 1.0)) *
                               (rng.uniform(idx, lane + 6) < 0.5 ? -1.0 : 1.0);
            for (std::size_t node = 0; node < lattice.num_nodes(); ++node) {
                const double r2 = (lattice.node_point(node) - centre).squaredNorm();
                v[static_cast<Eigen::Index>(node)] += amp * std::exp(-r2 / (width * width));
            }
        }
        fields.push_back(std::move(v));
    }

    CoercivityReport rep;
    const double H = solve.norms.h_lp_prime;
    const double c1 = g_lower / (p * lambda);
    const double C1 = g_upper * lambda / p;
    const double s = c1 / 2.0;
    const double t_star = H > 0.0 ? std::pow(H / (p * s), 1.0 / (p - 1.0)) : 0.0;
    rep.A = H * t_star / pp + c1 / 2.0;
    rep.b = c1 / 4.0;
    rep.c_upper = std::numeric_limits<double>::infinity();
    rep.two_constant_holds = true;
    rep.upper_holds = true;
    for (const auto& v : fields) {
        const auto grad = cell_gradients(energy, v);
        const DefectNorms n = defect_norms(lattice, grad, solve.weight, {}, p);
        CoercivitySample smp;
        smp.wu = n.wu;
        smp.energy = energy.value(v);
        const double N = smp.wu * smp.wu;
        smp.lower = -rep.A + rep.b * N;
        smp.upper = H * n.lp + C1 * (std::pow(n.lp, p) + n.weighted_l2 * n.weighted_l2);
        const double guard = 1e-10 * (1.0 + std::abs(smp.energy));
        rep.two_constant_holds = rep.two_constant_holds && smp.lower <= smp.energy + guard;
        rep.upper_holds = rep.upper_holds && smp.energy <= smp.upper + guard;
        // c (N - 1) <= F
        if (N > 1.0)
            rep.c_upper = std::min(rep.c_upper, smp.energy / (N - 1.0));
        else if (N < 1.0 && smp.energy < 0.0)
            rep.c_lower = std::max(rep.c_lower, smp.energy / (N - 1.0));
        else if (N == 1.0 && smp.energy < 0.0)
            rep.c_upper = -1.0;
        rep.C_min = std::max(rep.C_min, smp.energy / (1.0 + std::pow(smp.wu, p)));
        rep.samples.push_back(smp);
    }
    rep.single_constant_feasible = rep.c_upper > 0.0 && rep.c_lower <= rep.c_upper;
    return rep;
}

}  // namespace phom
