#pragma once

// Defect corrector on a truncated box [-R, R]^d. With u = xi + grad w_per_xi
// and h = a_defect |u|^{p-2} u, the corrector minimizes
//
//     F(v) = (1/p) int a g_u(grad v) + int h . grad v,
//     g_u(x) = |u + x|^p - |u|^p - p |u|^{p-2} u . x,
//
// whose Euler-Lagrange equation is -div [a |u + grad v|^{p-2}(u + grad v) - a_per |u|^{p-2} u] = 0.

#include "phom/cell.hpp"
#include "phom/coeffs.hpp"
#include "phom/grid_energy.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace phom {

enum class Truncation {
    natural,    // free boundary, constants removed
    dirichlet,  // zero boundary values
};
const char* to_string(Truncation t);

struct TruncatedDomain {
    int dim = 1;
    double R = 20.0;
    int nodes_per_unit = 128;
    Truncation boundary = Truncation::natural;

    /// Open lattice with nodes at -R + i/nodes_per_unit; throws unless 2 R nodes_per_unit
    /// is (close to) an integer and at least 16 nodes per unit cell are used.
    StructuredGrid lattice() const;
};

int default_defect_nodes_per_unit(int dim);
/// Decay radius of the defect rounded up to a whole period, plus 16 periods.
double default_truncation_radius(const Coefficient& c);

/// u = xi + grad w_per_xi as a function on R^d.
struct GradientSource {
    Vec xi;
    std::function<Vec(const Vec&)> eval;
    std::string origin;

    static GradientSource from_cell(std::shared_ptr<const CellSolve> cell);
    /// xi (a*/a_per)^{1/(p-1)}, one-dimensional only.
    static GradientSource closed_form_1d(double xi, const PeriodicCoefficient& a_per, double p,
                                         double a_star);
};

struct DefectSetup {
    std::shared_ptr<const Coefficient> coefficient;
    TruncatedDomain domain{};
    CellOptions cell{};           // for periodic gradients from cell solves
    MinimizeOptions minimize{};
    bool use_closed_form_1d = true;
};

/// The periodic corrected gradient for xi: closed form in 1D when allowed,
/// otherwise a cell solve.
GradientSource periodic_gradient(const DefectSetup& setup, const Vec& xi);

/// Per-cell data of the discrete functional: a, u, h.
CellTerms assemble_terms(const Coefficient& c, const GradientSource& u,
                         const StructuredGrid& lattice);

struct Annulus {
    double inner = 0.0;  // sup-norm radii
    double outer = 0.0;
    double grad_p = 0.0;        // int |grad v|^p
    double grad_p_prime = 0.0;  // int |grad v|^{p'}
    double weighted = 0.0;      // int |u|^{p-2} |grad v|^2
};

struct DefectNorms {
    double lp = 0.0;                // ||grad v||_{L^p}
    double weighted_l2 = 0.0;       // || |u|^{(p-2)/2} grad v ||_{L^2}
    double wu = 0.0;                // lp + weighted_l2
    double wu_from_annuli = 0.0;    // same, accumulated annulus by annulus
    double lp_prime = 0.0;          // ||grad v||_{L^{p'}}
    double h_lp_prime = 0.0;        // ||h||_{L^{p'}}
};

struct DefectSolve {
    Vec xi;
    double p = 2.0;
    TruncatedDomain domain;
    Eigen::VectorXd values;       // nodal w~
    std::vector<Vec> gradient;    // grad w~ at cell samples
    std::vector<Vec> u;           // xi + grad w_per at cell samples
    std::vector<Vec> h;
    std::vector<double> weight;   // |u|^{p-2}
    double energy = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> energy_trace;
    DefectNorms norms;
    std::vector<Annulus> annuli;
    double truncation_share = 0.0;  // outermost annulus share of int |grad w~|^p
    std::vector<std::string> warnings;
};

/// Dyadic sup-norm annuli [0, 1), [1, 2), [2, 4), ... cut at R.
std::vector<Annulus> annulus_table(const StructuredGrid& lattice, const std::vector<Vec>& grad,
                                   const std::vector<double>& weight, double p);
DefectNorms defect_norms(const StructuredGrid& lattice, const std::vector<Vec>& grad,
                         const std::vector<double>& weight, const std::vector<Vec>& h, double p);

/// F at nodal values v (F(0) = 0).
double defect_energy(const Coefficient& c, const GradientSource& u, const TruncatedDomain& domain,
                     const Eigen::VectorXd& v);

/// Throws NoConvergence. xi = 0 returns the zero field.
DefectSolve solve_defect(const Vec& xi, const DefectSetup& setup);
DefectSolve solve_defect(const GradientSource& u, const DefectSetup& setup);

struct TailReport {
    std::vector<Annulus> annuli;
    std::vector<double> cumulative;   // running sums of int |grad w~|^{p'}
    std::vector<double> tail_ratios;  // annulus k+1 over annulus k
    double lp_prime_over_xi = 0.0;
    /// max tail ratio over annuli whose inner radius is at least `from`.
    double max_ratio_beyond(double from) const;
};

TailReport integrability_report(const DefectSolve& solve);

struct ContinuityEntry {
    Vec xi, eta;
    double gap = 0.0;
    double numerator = 0.0;  // ||grad w~_xi - grad w~_eta||_{L^p}
    double ratio = 0.0;
};

struct ContinuityReport {
    double beta_tilde = 0.0;
    double gamma_est = 1.0;
    std::vector<ContinuityEntry> entries;
    double max_ratio = 0.0;
    double growth = 0.0;  // max over bases of max ratio / ratio at the largest gap
    bool bounded = true;  // growth <= 2
};

/// beta~ = (gamma_est/(p-1)) min(1, p-2). For each base xi and gap r, eta = xi + r e
/// with e a fixed unit direction.
ContinuityReport continuity_scan(const DefectSetup& setup, const std::vector<Vec>& bases,
                                 const std::vector<double>& gaps, double gamma_est,
                                 unsigned threads = 0);

/// Seeded bases with |xi| in [1/2, 2] and random directions.
std::vector<Vec> seeded_bases(int dim, int count, std::uint64_t seed);

struct CoercivitySample {
    double wu = 0.0;      // ||v||_{W_u}
    double energy = 0.0;  // F(v)
    double lower = 0.0;   // -A + b ||v||^2
    double upper = 0.0;   // ||h|| ||grad v||_p + C' (||grad v||_p^p + ||v||_weighted^2)
};

/// Sandwich bounds for F. The single-constant form c[-1 + ||v||^2] <= F is
/// reported as an interval of admissible c (empty when infeasible). The
/// two-constant form uses constants built from the pointwise bounds
/// g_lower (|x|^2|u|^{p-2} + |x|^p) <= g_u(x) <= g_upper (...) and lambda:
///     c' = g_lower / (p lambda),  A = K(||h||, c'/2) + c'/2,  b = c'/4,
/// with K(H, s) = sup_t (H t - s t^p).
struct CoercivityReport {
    std::vector<CoercivitySample> samples;
    double c_lower = 0.0;  // single-constant c must lie in [c_lower, c_upper]
    double c_upper = 0.0;
    bool single_constant_feasible = false;
    double A = 0.0, b = 0.0;
    bool two_constant_holds = false;
    bool upper_holds = false;
    double C_min = 0.0;  // smallest C with F <= C (1 + ||v||^p) over the samples
};

CoercivityReport coercivity_check(const DefectSolve& solve, const DefectSetup& setup,
                                  const GradientSource& u, int count, std::uint64_t seed,
                                  double g_lower, double g_upper);

}  // namespace phom
