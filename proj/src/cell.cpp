#include "phom/cell.hpp"

#include "phom/errors.hpp"
#include "phom/oned.hpp"
#include "phom/parallel.hpp"
#include "phom/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace phom {

PeriodicGrid::PeriodicGrid(int dim, int n)
    : lattice_(dim, n, 1.0 / n, -0.5 + 0.5 / n, true)
{
}

int default_cell_grid(int dim) { return dim == 1 ? 256 : 64; }

double PeriodicField::mean() const
{
    return values.size() == 0 ? 0.0 : values.mean();
}

void PeriodicField::normalize()
{
    values.array() -= mean();
}

Vec CellSolve::corrected_gradient(const Vec& y) const
{
    const int d = field.grid.dim();
    const int n = field.grid.n();
    std::array<int, 3> i0{}, i1{};
    std::array<double, 3> frac{};
    for (int k = 0; k < d; ++k) {
        // sample i sits at t = i
        double t = (y[k] + 0.5) * n - 1.0;
        t -= n * std::floor(t / n);
        int lo = static_cast<int>(std::floor(t));
        frac[static_cast<std::size_t>(k)] = t - lo;
        lo %= n;
        i0[static_cast<std::size_t>(k)] = lo;
        i1[static_cast<std::size_t>(k)] = (lo + 1) % n;
    }
    Vec out = zero_vec(d);
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        std::size_t cell = 0;
        for (int k = 0; k < d; ++k) {
            const bool up = (corner >> k) & 1;
            const auto ks = static_cast<std::size_t>(k);
            w *= up ? frac[ks] : 1.0 - frac[ks];
            cell = cell * static_cast<std::size_t>(n) +
                   static_cast<std::size_t>(up ? i1[ks] : i0[ks]);
        }
        if (w != 0.0)
            out += w * corrected[cell];
    }
    return out;
}

Vec CellSolve::homogenized_flux() const
{
    Vec s = zero_vec(static_cast<int>(xi.size()));
    for (std::size_t c = 0; c < corrected.size(); ++c)
        s += a[c] * abs_power(corrected[c].norm(), p - 2.0) * corrected[c];
    return s * field.grid.cell_volume();
}

namespace {

CellTerms cell_terms(const PeriodicGrid& grid, const Vec& xi, const PeriodicCoefficient& a_per)
{
    CellTerms t;
    const auto& lat = grid.lattice();
    t.a.resize(lat.num_cells());
    t.base.assign(lat.num_cells(), xi);
    for (std::size_t c = 0; c < lat.num_cells(); ++c)
        t.a[c] = a_per(lat.sample_point(c));
    return t;
}

}  // namespace

double discrete_energy(const Vec& xi, const PeriodicField& v, const PeriodicCoefficient& a_per,
                       double p)
{
    if (xi.size() != v.grid.dim() || a_per.dim() != v.grid.dim())
        throw InvalidArgument("discrete_energy: dimension mismatch");
    const GridEnergy e(v.grid.lattice(), p, cell_terms(v.grid, xi, a_per));
    return e.value(v.values);
}

CellSolve solve_cell(const Vec& xi, const PeriodicCoefficient& a_per, double p,
                     const CellOptions& options)
{
    const int d = a_per.dim();
    if (xi.size() != d)
        throw InvalidArgument("solve_cell: xi has the wrong dimension");
    if (!(p >= 2.0))
        throw InvalidArgument("solve_cell: p must be >= 2");
    const int n = options.n > 0 ? options.n : default_cell_grid(d);
    const PeriodicGrid grid(d, n);
    CellTerms terms = cell_terms(grid, xi, a_per);

    CellSolve s;
    s.xi = xi;
    s.p = p;
    s.field = {grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_nodes()))};
    s.a = terms.a;
    if (xi.norm() == 0.0) {
        s.corrected.assign(grid.lattice().num_cells(), zero_vec(d));
        s.energy_trace.push_back(0.0);
        return s;
    }

    const GridEnergy energy(grid.lattice(), p, std::move(terms));
    const Constraints cons = make_constraints(grid.lattice(), false);
    MinimizeResult r = minimize(energy, cons, s.field.values, options.minimize);
    if (!r.converged)
        throw NoConvergence("cell", r.iterations, r.residual);

    s.field.values = std::move(r.v);
    s.field.normalize();
    s.energy = energy.value(s.field.values);
    s.residual = r.residual;
    s.iterations = r.iterations;
    s.energy_trace = std::move(r.energy_trace);
    s.corrected.resize(grid.lattice().num_cells());
    for (std::size_t c = 0; c < s.corrected.size(); ++c)
        s.corrected[c] = xi + energy.discrete_gradient(s.field.values, c);
    return s;
}

double cell_lp_distance(const std::vector<Vec>& f, const std::vector<Vec>& g, double p,
                        double cell_volume)
{
    if (f.size() != g.size())
        throw InvalidArgument("cell_lp_distance: size mismatch");
    double s = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c)
        s += abs_power((f[c] - g[c]).norm(), p);
    return std::pow(s * cell_volume, 1.0 / p);
}

namespace {

std::vector<Vec> corrector_gradients(const CellSolve& s)
{
    std::vector<Vec> g(s.corrected.size());
    for (std::size_t c = 0; c < g.size(); ++c)
        g[c] = s.corrected[c] - s.xi;
    return g;
}

std::vector<CellSolve> solve_all(const std::vector<Vec>& xis, const PeriodicCoefficient& a_per,
                                 double p, const CellOptions& options, unsigned threads)
{
    return parallel_map<CellSolve>(xis.size(), threads, [&](std::size_t i) {
        return solve_cell(xis[i], a_per, p, options);
    });
}

}  // namespace

HomogenizedOperator homogenized_operator(const std::vector<Vec>& xi_list,
                                         const PeriodicCoefficient& a_per, double p,
                                         const CellOptions& options, unsigned threads)
{
    HomogenizedOperator op;
    op.p = p;
    std::vector<Vec> xis = xi_list;
    if (a_per.dim() == 1)
        xis.push_back(make_vec({1.0}));
    const auto solves = solve_all(xis, a_per, p, options, threads);
    for (std::size_t i = 0; i < xi_list.size(); ++i)
        op.entries.emplace_back(xi_list[i], solves[i].homogenized_flux());
    if (a_per.dim() == 1) {
        op.scalar_1d = solves.back().homogenized_flux()[0];
        op.closed_form_1d = homogenized_coefficient_1d(a_per, p);
    }
    return op;
}

CorrectorPropertyReport check_corrector_properties(const PeriodicCoefficient& a_per, double p,
                          const std::vector<Vec>& xi_samples, int pairs, std::uint64_t seed,
                          const CellOptions& options, unsigned threads)
{
    const int d = a_per.dim();
    const double beta = 1.0 / (p - 1.0);
    static constexpr std::array<double, 3> kScales{-2.0, 0.5, 3.0};

    std::vector<Vec> xis;
    for (const Vec& xi : xi_samples) {
        xis.push_back(xi);
        for (double t : kScales)
            xis.push_back(t * xi);
    }
    const CounterRng rng(seed);
    std::vector<std::pair<Vec, Vec>> pair_list;
    for (int k = 0; k < pairs; ++k) {
        const auto idx = static_cast<std::uint64_t>(k);
        Vec xi(d), dir(d);
        for (int i = 0; i < d; ++i) {
            xi[i] = rng.uniform(idx, static_cast<std::uint64_t>(i), -2.0, 2.0);
            dir[i] = rng.uniform(idx, static_cast<std::uint64_t>(8 + i), -1.0, 1.0);
        }
        if (dir.norm() == 0.0)
            dir = unit_vec(d, 0);
        const double r = std::pow(10.0, rng.uniform(idx, 16, -3.0, 0.0));
        pair_list.emplace_back(xi, xi + r * dir.normalized());
        xis.push_back(pair_list.back().first);
        xis.push_back(pair_list.back().second);
    }

    const auto solves = solve_all(xis, a_per, p, options, threads);
    CorrectorPropertyReport rep;
    rep.solves = static_cast<int>(solves.size());
    std::size_t at = 0;
    for (const Vec& xi : xi_samples) {
        const CellSolve& base = solves[at++];
        const auto g = corrector_gradients(base);
        const double vol = base.field.grid.cell_volume();
        const double nxi = xi.norm();
        if (nxi > 0.0) {
            const std::vector<Vec> zero(g.size(), zero_vec(d));
            rep.lp_bound = std::max(rep.lp_bound, cell_lp_distance(g, zero, p, vol) / nxi);
        }
        for (double t : kScales) {
            const auto gt = corrector_gradients(solves[at++]);
            if (nxi == 0.0)
                continue;
            std::vector<Vec> scaled(g.size());
            for (std::size_t c = 0; c < g.size(); ++c)
                scaled[c] = t * g[c];
            rep.homogeneity_deviation = std::max(
                rep.homogeneity_deviation, cell_lp_distance(gt, scaled, p, vol) / (std::abs(t) * nxi));
        }
    }
    for (const auto& [xi, eta] : pair_list) {
        const CellSolve& sx = solves[at++];
        const CellSolve& se = solves[at++];
        const double gap = (xi - eta).norm();
        if (gap <= 1e-9)
            continue;
        const double num = cell_lp_distance(corrector_gradients(sx), corrector_gradients(se), p,
                                            sx.field.grid.cell_volume());
        const double den = (std::pow(xi.norm(), 1.0 - beta) + std::pow(eta.norm(), 1.0 - beta)) *
                           std::pow(gap, beta);
        const double ratio = num / den;
        rep.holder_ratios.push_back(ratio);
        rep.holder_ratio_max = std::max(rep.holder_ratio_max, ratio);
    }
    rep.gamma_est = xi_samples.empty() ? 1.0 : estimate_gamma(a_per, p, xi_samples.front(), options);
    return rep;
}

double estimate_gamma(const PeriodicCoefficient& a_per, double p, const Vec& xi,
                      const CellOptions& options)
{
    const int d = a_per.dim();
    const Vec e = Vec::Ones(d).normalized();
    const CellSolve base = solve_cell(xi, a_per, p, options);
    const auto g0 = corrector_gradients(base);
    std::vector<double> lx, ly;
    for (double r : {1e-1, 1e-2, 1e-3}) {
        const auto g = corrector_gradients(solve_cell(xi + r * e, a_per, p, options));
        double m = 0.0;
        for (std::size_t c = 0; c < g.size(); ++c)
            m = std::max(m, (g[c] - g0[c]).norm());
        if (m <= 0.0)
            return 1.0;
        lx.push_back(std::log(r));
        ly.push_back(std::log(m));
    }
    const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
    const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return std::clamp(sxy / sxx, 1e-3, 1.0);
}

GradientBoundReport check_gradient_bound(const PeriodicCoefficient& a_per, double p, const std::vector<Vec>& xi_samples,
                  double threshold, const CellOptions& options, unsigned threads)
{
    GradientBoundReport rep;
    rep.threshold = threshold;
    std::vector<Vec> xis;
    for (const Vec& xi : xi_samples)
        if (xi.norm() > 0.0)
            xis.push_back(xi);
    const auto solves = solve_all(xis, a_per, p, options, threads);
    for (const CellSolve& s : solves) {
        double m = std::numeric_limits<double>::infinity();
        for (const Vec& z : s.corrected)
            m = std::min(m, z.norm());
        rep.per_sample.push_back(m / s.xi.norm());
        rep.c_est = std::min(rep.c_est, rep.per_sample.back());
    }
    rep.passed = rep.c_est > threshold;
    return rep;
}

}  // namespace phom
