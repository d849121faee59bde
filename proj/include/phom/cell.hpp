#pragma once

// Periodic cell problem: the corrector w_xi minimizes
//
//     (1/p) int_Q a_per(y) |xi + grad v|^p dy,   Q = (-1/2, 1/2)^d,
//
// over mean-zero periodic v. The homogenized flux is
// a*(xi) = int_Q a_per |xi + grad w_xi|^{p-2} (xi + grad w_xi).

#include "phom/coeffs.hpp"
#include "phom/grid_energy.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace phom {

/// Uniform periodic lattice on Q with n nodes per axis at -1/2 + (i + 1/2)/n.
/// Discrete gradients live at the cell samples -1/2 + (i + 1)/n, so the
/// origin is a sample whenever n is even.
class PeriodicGrid {
public:
    PeriodicGrid() : PeriodicGrid(1, 4) {}
    PeriodicGrid(int dim, int n);

    int dim() const { return lattice_.dim(); }
    int n() const { return lattice_.cells_per_axis(); }
    std::size_t num_nodes() const { return lattice_.num_nodes(); }
    double cell_volume() const { return lattice_.cell_volume(); }
    const StructuredGrid& lattice() const { return lattice_; }

private:
    StructuredGrid lattice_;
};

int default_cell_grid(int dim);

struct PeriodicField {
    PeriodicGrid grid;
    Eigen::VectorXd values;

    double mean() const;
    void normalize();  // subtract the mean
};

struct CellOptions {
    int n = 0;  // 0 selects default_cell_grid(dim)
    MinimizeOptions minimize{};
};

struct CellSolve {
    Vec xi;
    double p = 2.0;
    PeriodicField field;
    std::vector<Vec> corrected;  // xi + grad w at every cell sample
    std::vector<double> a;       // a_per at every cell sample
    double energy = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> energy_trace;

    /// Periodic multilinear interpolation of xi + grad w.
    Vec corrected_gradient(const Vec& y) const;
    Vec corrector_gradient(const Vec& y) const { return corrected_gradient(y) - xi; }
    /// Cell average of a_per |xi + grad w|^{p-2} (xi + grad w).
    Vec homogenized_flux() const;
};

/// (1/p) sum_cells h^d a_per |xi + D v|^p.
double discrete_energy(const Vec& xi, const PeriodicField& v, const PeriodicCoefficient& a_per,
                       double p);

/// Throws NoConvergence when the residual does not reach options.minimize.tol.
CellSolve solve_cell(const Vec& xi, const PeriodicCoefficient& a_per, double p,
                     const CellOptions& options = {});

/// ||f - g||_{L^p(Q)} over cell samples, for per-cell vector fields.
double cell_lp_distance(const std::vector<Vec>& f, const std::vector<Vec>& g, double p,
                        double cell_volume);

struct HomogenizedOperator {
    double p = 2.0;
    std::vector<std::pair<Vec, Vec>> entries;  // (xi, a*(xi))
    std::optional<double> scalar_1d;            // a* read off a*(1) in 1D
    std::optional<double> closed_form_1d;       // harmonic-type formula, for cross-checking
};

HomogenizedOperator homogenized_operator(const std::vector<Vec>& xi_list,
                                         const PeriodicCoefficient& a_per, double p,
                                         const CellOptions& options = {}, unsigned threads = 0);

struct CorrectorPropertyReport {
    double homogeneity_deviation = 0.0;  // max ||grad w_{t xi} - t grad w_xi||_Lp / (|t||xi|)
    double holder_ratio_max = 0.0;       // max ||grad w_xi - grad w_eta||_Lp / holder bound
    std::vector<double> holder_ratios;
    double lp_bound = 0.0;               // max ||grad w_xi||_Lp / |xi|
    double gamma_est = 1.0;              // fitted L^inf continuity exponent
    int solves = 0;
};

/// Homogeneity over t in {-2, 1/2, 3} and t = 1 for every xi sample, then
/// `pairs` seeded (xi, eta) pairs for the continuity ratios.
CorrectorPropertyReport check_corrector_properties(const PeriodicCoefficient& a_per, double p,
                          const std::vector<Vec>& xi_samples, int pairs, std::uint64_t seed,
                          const CellOptions& options = {}, unsigned threads = 0);

/// Slope of log ||grad w_xi - grad w_eta||_inf against log |xi - eta| for
/// eta = xi + r e with r in {1e-1, 1e-2, 1e-3}; clipped to (0, 1].
double estimate_gamma(const PeriodicCoefficient& a_per, double p, const Vec& xi,
                      const CellOptions& options = {});

struct GradientBoundReport {
    double c_est = 1.0;
    double threshold = 0.0;
    std::vector<double> per_sample;
    bool passed = true;
};

/// c_est = min over samples and cells of |xi + grad w_xi| / |xi|.
GradientBoundReport check_gradient_bound(const PeriodicCoefficient& a_per, double p, const std::vector<Vec>& xi_samples,
                  double threshold, const CellOptions& options = {}, unsigned threads = 0);

}  // namespace phom
