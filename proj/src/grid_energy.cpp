#include "phom/grid_energy.hpp"

#include "phom/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace phom {

// ---------------------------------------------------------------- grid

StructuredGrid::StructuredGrid(int dim, int cells_per_axis, double spacing, double node_origin,
                               bool periodic)
    : dim_(dim), n_(cells_per_axis), h_(spacing), origin_(node_origin), periodic_(periodic)
{
    if (dim < 1 || dim > 3)
        throw InvalidArgument("StructuredGrid: dimension must be 1, 2 or 3");
    if (cells_per_axis < (periodic ? 4 : 1))
        throw InvalidArgument("StructuredGrid: too few cells per axis");
    if (!(spacing > 0.0))
        throw InvalidArgument("StructuredGrid: spacing must be positive");
    num_cells_ = 1;
    num_nodes_ = 1;
    volume_ = 1.0;
    for (int k = 0; k < dim; ++k) {
        num_cells_ *= static_cast<std::size_t>(n_);
        num_nodes_ *= static_cast<std::size_t>(nodes_per_axis());
        volume_ *= h_;
    }
}

std::array<int, 3> StructuredGrid::cell_index(std::size_t cell) const
{
    std::array<int, 3> idx{0, 0, 0};
    for (int k = dim_ - 1; k >= 0; --k) {
        idx[static_cast<std::size_t>(k)] = static_cast<int>(cell % static_cast<std::size_t>(n_));
        cell /= static_cast<std::size_t>(n_);
    }
    return idx;
}

std::size_t StructuredGrid::corner_node(std::size_t cell) const
{
    if (periodic_)
        return cell;
    const auto idx = cell_index(cell);
    std::size_t node = 0;
    for (int k = 0; k < dim_; ++k)
        node = node * static_cast<std::size_t>(n_ + 1) +
               static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
    return node;
}

std::size_t StructuredGrid::forward_node(std::size_t cell, int axis) const
{
    auto idx = cell_index(cell);
    idx[static_cast<std::size_t>(axis)] += 1;
    const int m = nodes_per_axis();
    std::size_t node = 0;
    for (int k = 0; k < dim_; ++k) {
        int i = idx[static_cast<std::size_t>(k)];
        if (periodic_ && i == n_)
            i = 0;
        node = node * static_cast<std::size_t>(m) + static_cast<std::size_t>(i);
    }
    return node;
}

Vec StructuredGrid::sample_point(std::size_t cell) const
{
    const auto idx = cell_index(cell);
    Vec y(dim_);
    for (int k = 0; k < dim_; ++k)
        y[k] = origin_ + (idx[static_cast<std::size_t>(k)] + 0.5) * h_;
    return y;
}

Vec StructuredGrid::node_point(std::size_t node) const
{
    Vec y(dim_);
    const auto m = static_cast<std::size_t>(nodes_per_axis());
    for (int k = dim_ - 1; k >= 0; --k) {
        y[k] = origin_ + static_cast<double>(node % m) * h_;
        node /= m;
    }
    return y;
}

// ---------------------------------------------------------------- energy

GridEnergy::GridEnergy(StructuredGrid grid, double p, CellTerms terms)
    : grid_(std::move(grid)), p_(p), terms_(std::move(terms))
{
    if (!(p >= 2.0))
        throw InvalidArgument("GridEnergy: p must be >= 2");
    if (terms_.a.size() != grid_.num_cells() || terms_.base.size() != grid_.num_cells())
        throw InvalidArgument("GridEnergy: per-cell data does not match the grid");
    if (!terms_.linear.empty() && terms_.linear.size() != grid_.num_cells())
        throw InvalidArgument("GridEnergy: linear term does not match the grid");
}

Vec GridEnergy::discrete_gradient(const Eigen::VectorXd& v, std::size_t cell) const
{
    const int d = grid_.dim();
    Vec g(d);
    const double vc = v[static_cast<Eigen::Index>(grid_.corner_node(cell))];
    for (int k = 0; k < d; ++k)
        g[k] = (v[static_cast<Eigen::Index>(grid_.forward_node(cell, k))] - vc) / grid_.spacing();
    return g;
}

double GridEnergy::density(std::size_t cell, const Vec& x) const
{
    const Vec& b = terms_.base[cell];
    const double a = terms_.a[cell];
    double e;
    if (terms_.subtract_linearization) {
        const double nb = b.norm();
        e = abs_power((b + x).norm(), p_) - abs_power(nb, p_) -
            p_ * abs_power(nb, p_ - 2.0) * b.dot(x);
    } else {
        e = abs_power((b + x).norm(), p_);
    }
    e *= a / p_;
    if (!terms_.linear.empty())
        e += terms_.linear[cell].dot(x);
    return e;
}

Vec GridEnergy::flux(std::size_t cell, const Vec& x) const
{
    const Vec& b = terms_.base[cell];
    const Vec z = b + x;
    Vec f = terms_.a[cell] * abs_power(z.norm(), p_ - 2.0) * z;
    if (terms_.subtract_linearization)
        f -= terms_.a[cell] * abs_power(b.norm(), p_ - 2.0) * b;
    if (!terms_.linear.empty())
        f += terms_.linear[cell];
    return f;
}

double GridEnergy::value(const Eigen::VectorXd& v) const
{
    double s = 0.0;
    for (std::size_t c = 0; c < grid_.num_cells(); ++c)
        s += density(c, discrete_gradient(v, c));
    return s * grid_.cell_volume();
}

Eigen::VectorXd GridEnergy::gradient(const Eigen::VectorXd& v) const
{
    Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
    const double scale = grid_.cell_volume() / grid_.spacing();
    for (std::size_t c = 0; c < grid_.num_cells(); ++c) {
        const Vec f = flux(c, discrete_gradient(v, c));
        const auto corner = static_cast<Eigen::Index>(grid_.corner_node(c));
        for (int k = 0; k < grid_.dim(); ++k) {
            g[static_cast<Eigen::Index>(grid_.forward_node(c, k))] += scale * f[k];
            g[corner] -= scale * f[k];
        }
    }
    return g;
}

namespace {

// Assembles h^d sum_c B_c^T A_c B_c where A_c is produced by `local`.
template <class LocalMatrix>
Eigen::SparseMatrix<double> assemble(const StructuredGrid& grid, LocalMatrix&& local)
{
    const int d = grid.dim();
    const double h = grid.spacing();
    const double vol = grid.cell_volume();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(grid.num_cells() * static_cast<std::size_t>((d + 1) * (d + 1)));
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> A(d, d);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 4> B(d, d + 1);
    std::array<Eigen::Index, 4> nodes{};
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
        local(c, A);
        nodes[0] = static_cast<Eigen::Index>(grid.corner_node(c));
        B.setZero();
        for (int k = 0; k < d; ++k) {
            nodes[static_cast<std::size_t>(k + 1)] =
                static_cast<Eigen::Index>(grid.forward_node(c, k));
            B(k, 0) = -1.0 / h;
            B(k, k + 1) = 1.0 / h;
        }
        const auto Hloc = (vol * B.transpose() * A * B).eval();
        for (int i = 0; i <= d; ++i)
            for (int j = 0; j <= d; ++j)
                triplets.emplace_back(nodes[static_cast<std::size_t>(i)],
                                      nodes[static_cast<std::size_t>(j)], Hloc(i, j));
    }
    const auto n = static_cast<Eigen::Index>(grid.num_nodes());
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(triplets.begin(), triplets.end());
    return M;
}

}  // namespace

Eigen::SparseMatrix<double> GridEnergy::hessian(const Eigen::VectorXd& v, double shift) const
{
    const int d = grid_.dim();
    return assemble(grid_, [&](std::size_t c, auto& A) {
        const Vec z = terms_.base[c] + discrete_gradient(v, c);
        const double nz = z.norm();
        const double w = terms_.a[c] * abs_power(nz, p_ - 2.0);
        A.setIdentity(d, d);
        A *= w;
        if (nz > 0.0 && p_ != 2.0) {
            const Vec u = z / nz;
            A += w * (p_ - 2.0) * (u * u.transpose());
        }
        A.diagonal().array() += shift;
    });
}

Eigen::SparseMatrix<double> GridEnergy::laplacian() const
{
    const int d = grid_.dim();
    return assemble(grid_, [d](std::size_t, auto& A) { A.setIdentity(d, d); });
}

double GridEnergy::flux_scale() const
{
    double mean_a = 0.0, max_b = 0.0, max_l = 0.0;
    for (std::size_t c = 0; c < grid_.num_cells(); ++c) {
        mean_a += terms_.a[c];
        max_b = std::max(max_b, terms_.base[c].norm());
        if (!terms_.linear.empty())
            max_l = std::max(max_l, terms_.linear[c].norm());
    }
    mean_a /= static_cast<double>(grid_.num_cells());
    const double s = mean_a * abs_power(max_b, p_ - 1.0) + max_l;
    return s > 0.0 ? s : 1.0;
}

double GridEnergy::stiffness_scale() const
{
    double mean_a = 0.0, max_b = 0.0;
    for (std::size_t c = 0; c < grid_.num_cells(); ++c) {
        mean_a += terms_.a[c];
        max_b = std::max(max_b, terms_.base[c].norm());
    }
    mean_a /= static_cast<double>(grid_.num_cells());
    const double s = mean_a * (p_ - 1.0) * abs_power(max_b, p_ - 2.0);
    return s > 0.0 ? s : 1.0;
}

// ---------------------------------------------------------------- constraints

Constraints make_constraints(const StructuredGrid& grid, bool dirichlet)
{
    Constraints cons;
    cons.fixed.assign(grid.num_nodes(), 1);
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
        cons.fixed[grid.corner_node(c)] = 0;
        for (int k = 0; k < grid.dim(); ++k)
            cons.fixed[grid.forward_node(c, k)] = 0;
    }
    if (dirichlet && !grid.periodic()) {
        const int m = grid.nodes_per_axis();
        for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
            std::size_t rest = node;
            for (int k = 0; k < grid.dim(); ++k) {
                const auto i = static_cast<int>(rest % static_cast<std::size_t>(m));
                rest /= static_cast<std::size_t>(m);
                if (i == 0 || i == m - 1)
                    cons.fixed[node] = 1;
            }
        }
    }
    cons.remove_constants = !(dirichlet && !grid.periodic());
    return cons;
}

// ---------------------------------------------------------------- minimizer

namespace {

// Linear algebra on the free nodes, with one node pinned when constants are
// in the kernel.
class ReducedSpace {
public:
    explicit ReducedSpace(const Constraints& cons) : remove_constants_(cons.remove_constants)
    {
        to_reduced_.assign(cons.fixed.size(), -1);
        bool pinned = false;
        for (std::size_t i = 0; i < cons.fixed.size(); ++i) {
            if (cons.fixed[i])
                continue;
            free_.push_back(i);
            if (remove_constants_ && !pinned) {
                pinned = true;
                continue;
            }
            to_reduced_[i] = static_cast<Eigen::Index>(to_full_.size());
            to_full_.push_back(i);
        }
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(to_full_.size()); }

    Eigen::SparseMatrix<double> reduce(const Eigen::SparseMatrix<double>& M) const
    {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<std::size_t>(M.nonZeros()));
        for (Eigen::Index col = 0; col < M.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it) {
                const auto r = to_reduced_[static_cast<std::size_t>(it.row())];
                const auto c = to_reduced_[static_cast<std::size_t>(it.col())];
                if (r >= 0 && c >= 0)
                    t.emplace_back(r, c, it.value());
            }
        Eigen::SparseMatrix<double> R(size(), size());
        R.setFromTriplets(t.begin(), t.end());
        return R;
    }

    Eigen::VectorXd reduce(const Eigen::VectorXd& x) const
    {
        Eigen::VectorXd r(size());
        for (Eigen::Index i = 0; i < size(); ++i)
            r[i] = x[static_cast<Eigen::Index>(to_full_[static_cast<std::size_t>(i)])];
        return r;
    }

    Eigen::VectorXd expand(const Eigen::VectorXd& r, Eigen::Index full_size) const
    {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(full_size);
        for (Eigen::Index i = 0; i < size(); ++i)
            x[static_cast<Eigen::Index>(to_full_[static_cast<std::size_t>(i)])] = r[i];
        project(x);
        return x;
    }

    /// Zero mean over the free nodes (no-op without a constant kernel).
    void project(Eigen::VectorXd& x) const
    {
        if (!remove_constants_ || free_.empty())
            return;
        double mean = 0.0;
        for (auto i : free_)
            mean += x[static_cast<Eigen::Index>(i)];
        mean /= static_cast<double>(free_.size());
        for (auto i : free_)
            x[static_cast<Eigen::Index>(i)] -= mean;
    }

    void zero_fixed(Eigen::VectorXd& g, const Constraints& cons) const
    {
        for (std::size_t i = 0; i < cons.fixed.size(); ++i)
            if (cons.fixed[i])
                g[static_cast<Eigen::Index>(i)] = 0.0;
    }

private:
    bool remove_constants_;
    std::vector<Eigen::Index> to_reduced_;
    std::vector<std::size_t> to_full_;
    std::vector<std::size_t> free_;
};

using Factorization = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

}  // namespace

double preconditioned_residual(const GridEnergy& energy, const Constraints& constraints,
                               const Eigen::VectorXd& v)
{
    const ReducedSpace space(constraints);
    Factorization lap(space.reduce(energy.laplacian()));
    Eigen::VectorXd g = energy.gradient(v);
    space.zero_fixed(g, constraints);
    const Eigen::VectorXd gr = space.reduce(g);
    const Eigen::VectorXd z = lap.solve(gr);
    return std::sqrt(std::max(0.0, gr.dot(z))) / energy.flux_scale();
}

MinimizeResult minimize(const GridEnergy& energy, const Constraints& constraints,
                        Eigen::VectorXd v0, const MinimizeOptions& options)
{
    const ReducedSpace space(constraints);
    const Eigen::SparseMatrix<double> L = energy.laplacian();
    Factorization lap(space.reduce(L));
    if (lap.info() != Eigen::Success)
        throw Error("minimize: lattice Laplacian factorization failed");

    const Eigen::Index n = v0.size();
    const double scale = energy.flux_scale();
    const double shift = 1e-10 * energy.stiffness_scale();
    constexpr double kRoundoff = 1e-13;

    MinimizeResult res;
    Eigen::VectorXd v = std::move(v0);
    space.project(v);
    double E = energy.value(v);

    Factorization hess;
    bool hess_analyzed = false;
    double alpha = 1.0 / energy.stiffness_scale();
    std::optional<Eigen::VectorXd> v_prev, g_prev;

    auto gradient_at = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = energy.gradient(x);
        space.zero_fixed(g, constraints);
        return g;
    };
    auto residual_of = [&](const Eigen::VectorXd& g, Eigen::VectorXd* precond) {
        const Eigen::VectorXd gr = space.reduce(g);
        const Eigen::VectorXd z = lap.solve(gr);
        if (precond)
            *precond = space.expand(z, n);
        return std::sqrt(std::max(0.0, gr.dot(z))) / scale;
    };

    Eigen::VectorXd g = gradient_at(v);
    Eigen::VectorXd z;
    double r = residual_of(g, &z);

    for (int it = 0;; ++it) {
        res.energy_trace.push_back(E);
        if (r <= options.tol) {
            res.converged = true;
            break;
        }
        if (it >= options.max_iter)
            break;

        // search direction
        Eigen::VectorXd d;
        bool newton_dir = false;
        const bool try_newton = options.newton && (r < options.newton_switch ||
                                                   res.gradient_steps >= options.gradient_limit);
        if (try_newton) {
            const auto H = space.reduce(energy.hessian(v, shift));
            if (!hess_analyzed) {
                hess.analyzePattern(H);
                hess_analyzed = true;
            }
            hess.factorize(H);
            if (hess.info() == Eigen::Success) {
                d = space.expand(-hess.solve(space.reduce(g)), n);
                newton_dir = d.allFinite() && g.dot(d) < 0.0;
            }
        }
        if (!newton_dir) {
            if (v_prev && g_prev) {
                const Eigen::VectorXd s = v - *v_prev;
                const Eigen::VectorXd y = g - *g_prev;
                const double sy = s.dot(y);
                const double sLs = s.dot(L * s);
                if (sy > 0.0 && sLs > 0.0)
                    alpha = sLs / sy;
            }
            d = -alpha * z;
        }

        // Armijo backtracking
        const double slope = g.dot(d);
        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd v_try;
        double E_try = E;
        for (int ls = 0; ls < 60; ++ls) {
            v_try = v + t * d;
            space.project(v_try);
            E_try = energy.value(v_try);
            if (E_try <= E + options.armijo * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        Eigen::VectorXd g_try, z_try;
        double r_try = r;
        if (!accepted) {
            // near the minimizer energy differences drown in round-off; take
            // the full step if it shrinks the residual and stays within round-off
            v_try = v + d;
            space.project(v_try);
            E_try = energy.value(v_try);
            g_try = gradient_at(v_try);
            r_try = residual_of(g_try, &z_try);
            if (!(E_try <= E + kRoundoff * (1.0 + std::abs(E)) && r_try < r))
                break;
        } else {
            g_try = gradient_at(v_try);
            r_try = residual_of(g_try, &z_try);
        }

        (newton_dir ? res.newton_steps : res.gradient_steps)++;
        v_prev = v;
        g_prev = g;
        v = std::move(v_try);
        g = std::move(g_try);
        z = std::move(z_try);
        E = E_try;
        r = r_try;
        res.iterations = it + 1;
    }

    res.v = std::move(v);
    res.energy = E;
    res.residual = r;
    return res;
}

}  // namespace phom
