#pragma once

// Discrete convex energies of p-Laplace type on regular lattices, and the
// line-searched first-order / Newton minimizer shared by the cell and defect
// solvers.
//
// Each lattice "cell" c owns one discrete gradient, built from forward
// differences out of its lower corner node:
//
//     (D v)_c,k = (v[c + e_k] - v[c]) / h,
//
// sampled at the cell center. The energy is
//
//     E(v) = h^d sum_c  e_c((D v)_c),
//     e_c(x) = a_c/p |b_c + x|^p + l_c . x                 (plain form)
//     e_c(x) = a_c/p g_{b_c}(x) + l_c . x                  (linearization subtracted)
//
// with g_b(x) = |b + x|^p - |b|^p - p |b|^{p-2} b . x.

#include "phom/numerics.hpp"

#include <Eigen/Sparse>

#include <array>
#include <cstddef>
#include <vector>

namespace phom {

class StructuredGrid {
public:
    /// Periodic grids have n nodes per axis and wrap; open grids have n + 1.
    /// Node i on each axis sits at node_origin + i * spacing.
    StructuredGrid(int dim, int cells_per_axis, double spacing, double node_origin, bool periodic);

    int dim() const { return dim_; }
    int cells_per_axis() const { return n_; }
    int nodes_per_axis() const { return periodic_ ? n_ : n_ + 1; }
    double spacing() const { return h_; }
    double node_origin() const { return origin_; }
    bool periodic() const { return periodic_; }
    std::size_t num_cells() const { return num_cells_; }
    std::size_t num_nodes() const { return num_nodes_; }
    double cell_volume() const { return volume_; }

    std::array<int, 3> cell_index(std::size_t cell) const;
    std::size_t corner_node(std::size_t cell) const;
    std::size_t forward_node(std::size_t cell, int axis) const;
    Vec sample_point(std::size_t cell) const;
    Vec node_point(std::size_t node) const;

private:
    int dim_;
    int n_;
    double h_;
    double origin_;
    bool periodic_;
    std::size_t num_cells_;
    std::size_t num_nodes_;
    double volume_;
};

struct CellTerms {
    std::vector<double> a;     // coefficient at each cell sample point
    std::vector<Vec> base;     // b_c
    std::vector<Vec> linear;   // l_c; empty means zero
    bool subtract_linearization = false;
};

class GridEnergy {
public:
    GridEnergy(StructuredGrid grid, double p, CellTerms terms);

    const StructuredGrid& grid() const { return grid_; }
    double p() const { return p_; }
    const CellTerms& terms() const { return terms_; }

    Vec discrete_gradient(const Eigen::VectorXd& v, std::size_t cell) const;
    double density(std::size_t cell, const Vec& x) const;
    /// d e_c / dx
    Vec flux(std::size_t cell, const Vec& x) const;

    double value(const Eigen::VectorXd& v) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& v) const;
    /// Hessian plus shift times the lattice Laplacian.
    Eigen::SparseMatrix<double> hessian(const Eigen::VectorXd& v, double shift) const;
    /// h^d sum_c D_c^T D_c: the p = 2, a = 1 Hessian.
    Eigen::SparseMatrix<double> laplacian() const;

    /// Typical flux magnitude: mean(a) * max|b|^{p-1} + max|l|.
    double flux_scale() const;
    /// Typical Hessian weight: mean(a) * (p - 1) * max|b|^{p-2}.
    double stiffness_scale() const;

private:
    StructuredGrid grid_;
    double p_;
    CellTerms terms_;
};

struct Constraints {
    std::vector<char> fixed;        // nodes frozen at their initial value
    bool remove_constants = false;  // energy invariant under shifting all free nodes
};

/// Free nodes untouched by any cell are frozen; dirichlet also freezes the
/// boundary of an open grid. Periodic and free-boundary problems remove constants.
Constraints make_constraints(const StructuredGrid& grid, bool dirichlet);

struct MinimizeOptions {
    double tol = 1e-9;            // on the preconditioned residual / flux_scale
    int max_iter = 500;
    bool newton = true;
    double newton_switch = 1e-2;  // residual below which Newton steps are tried
    int gradient_limit = 200;     // gradient steps before Newton is tried regardless
    double armijo = 1e-4;
};

struct MinimizeResult {
    Eigen::VectorXd v;
    double energy = 0.0;
    double residual = 0.0;
    int iterations = 0;
    int gradient_steps = 0;
    int newton_steps = 0;
    bool converged = false;
    std::vector<double> energy_trace;
};

/// Minimizes a GridEnergy from v0. The energy trace is nonincreasing up to
/// a 1e-13 relative round-off allowance. Does not throw on non-convergence;
/// callers inspect `converged`.
MinimizeResult minimize(const GridEnergy& energy, const Constraints& constraints,
                        Eigen::VectorXd v0, const MinimizeOptions& options);

/// Preconditioned residual sqrt(g^T L^{-1} g) / flux_scale at v.
double preconditioned_residual(const GridEnergy& energy, const Constraints& constraints,
                               const Eigen::VectorXd& v);

}  // namespace phom
