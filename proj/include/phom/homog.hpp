#pragma once

// Discretization operator M_delta and the 1D epsilon-convergence study.
//
// M_delta phi = sum over k with delta(Q + k) inside Omega of (mean of phi on
// delta(Q + k)) 1_{delta(Q + k)}, Q = (-1/2, 1/2)^d. Points of Omega outside
// every such cell (boundary slivers) are uncovered and carry the value 0.

#include "phom/cell.hpp"
#include "phom/defect.hpp"
#include "phom/oned.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace phom {

struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double measure() const;
    bool contains(const Vec& x) const;
    static Box interval(double lo, double hi) { return {{lo}, {hi}}; }
};

using Field = std::function<Vec(const Vec&)>;

class StepFunction {
public:
    StepFunction() = default;
    StepFunction(Box omega, double delta, int value_dim);

    const Box& omega() const { return omega_; }
    double delta() const { return delta_; }
    int dim() const { return omega_.dim(); }
    int value_dim() const { return value_dim_; }
    std::size_t num_cells() const { return values_.size(); }
    double covered_measure() const;

    /// Lattice index of cell i.
    std::vector<long> index(std::size_t i) const;
    /// delta k, the centre of cell i.
    Vec centre(std::size_t i) const;
    const Vec& value(std::size_t i) const { return values_[i]; }
    Vec& value(std::size_t i) { return values_[i]; }

    /// Cell containing x, if x lies in a covered cell.
    std::optional<std::size_t> cell_of(const Vec& x) const;
    /// Value at x, zero on uncovered points.
    Vec operator()(const Vec& x) const;

private:
    Box omega_;
    double delta_ = 1.0;
    int value_dim_ = 1;
    std::vector<long> k_lo_;
    std::vector<long> counts_;
    std::vector<Vec> values_;
};

struct DiscretizeOptions {
    int order = 8;          // Gauss-Legendre points per axis and sub-cell
    int subdivisions = 4;   // sub-cells per axis
};

/// Throws InvalidArgument unless delta > 0 and 1 <= dim <= 2.
StepFunction discretize(const Field& phi, const Box& omega, double delta, int value_dim = 1,
                        const DiscretizeOptions& options = {});
StepFunction discretize(const std::function<double(double)>& phi, double lo, double hi,
                        double delta, const DiscretizeOptions& options = {});

/// || M phi - phi ||_{L^p} over the covered cells (covered_only) or all of Omega.
double step_error(const Field& phi, const StepFunction& m, double p, bool covered_only,
                  const DiscretizeOptions& options = {});

struct OrderEntry {
    double delta = 0.0;
    double error_covered = 0.0;
    double error_full = 0.0;
    double order_covered = 0.0;  // log2 ratio against the previous (2x larger) delta
    double order_full = 0.0;
};

/// Errors of M_delta phi over a decreasing list of deltas with observed orders.
std::vector<OrderEntry> discretization_orders(const Field& phi, const Box& omega,
                                              const std::vector<double>& deltas, double p,
                                              int value_dim = 1);

struct JensenEntry {
    double delta = 0.0;
    double lhs = 0.0;  // sum delta^d |mean|^p
    double rhs = 0.0;  // int_Omega |phi|^p
    bool holds = false;
};

struct JensenReport {
    std::vector<JensenEntry> entries;
    bool holds = true;
};

/// Checks lhs <= rhs + 1e-10 max(1, rhs) for every delta.
JensenReport jensen_check(const Field& phi, const Box& omega, const std::vector<double>& deltas,
                          double p, int value_dim = 1);

/// Piecewise constant scalar function on [lo, hi] with `pieces` seeded values in [-2, 2].
std::function<double(double)> random_piecewise(double lo, double hi, int pieces,
                                               std::uint64_t seed);

/// grad w_eta(y) for the periodic or the full corrector, with the homogeneity
/// reduction grad w_eta = |eta| grad w_{eta/|eta|} and a cache of unit
/// directions. A direction and its negative share one entry.
class CorrectorBank {
public:
    /// Explicit 1D correctors; never solves.
    static std::shared_ptr<CorrectorBank> closed_form_1d(std::shared_ptr<const Coefficient> c,
                                                         CorrectorKind kind, double a_star);
    /// Cell solves (periodic) or cell plus defect solves (full), at most
    /// `solve_budget` new directions.
    static std::shared_ptr<CorrectorBank> solved(const DefectSetup& setup, CorrectorKind kind,
                                                 int solve_budget);

    CorrectorKind kind() const { return kind_; }
    int dim() const { return dim_; }

    /// Throws MissingCorrector when a new direction is needed past the budget.
    Vec gradient(const Vec& eta, const Vec& y) const;
    /// Solves (or fetches) the unit direction of eta.
    void prepare(const Vec& eta) const;

    std::size_t cached() const;
    int solves() const;

private:
    struct Entry {
        Vec direction;
        std::function<Vec(const Vec&)> unit_grad;
    };
    CorrectorBank() = default;
    // unit direction with a positive leading component, and the sign taken out
    std::pair<Vec, double> canonical(const Vec& eta) const;
    std::shared_ptr<const Entry> entry(const Vec& direction) const;
    std::shared_ptr<const Entry> build(const Vec& direction) const;

    CorrectorKind kind_ = CorrectorKind::periodic;
    int dim_ = 1;
    std::shared_ptr<const Coefficient> coefficient_;
    std::optional<double> a_star_1d_;
    std::optional<DefectSetup> setup_;
    int budget_ = 0;

    mutable std::shared_mutex mutex_;
    mutable std::map<std::vector<double>, std::shared_ptr<const Entry>> cache_;
    mutable int solves_ = 0;
};

/// x -> grad u*(x) + grad w_{M grad u*(x)}(x/eps) on covered cells, grad u*(x)
/// elsewhere. The bank must be of the requested kind.
Field two_scale_field(const Field& u_star_grad, const StepFunction& m,
                      std::shared_ptr<const CorrectorBank> bank, double eps, CorrectorKind kind);

struct ConvergenceRecord {
    double eps = 0.0;
    double delta = 0.0;           // eps^nu
    double C_eps = 0.0;
    double Lp_u_err = 0.0;        // ||u_eps - u*||_{L^p}
    double L2_u_err = 0.0;
    double flux_res_1 = 0.0;      // |int (flux_eps - flux*) phi| for phi = 1, x, sin(pi x)
    double flux_res_x = 0.0;
    double flux_res_sin = 0.0;
    double R_Linf = 0.0;          // first-order remainder of the requested kind
    double R_L2 = 0.0;
    double two_scale_Lp = 0.0;    // ||u_eps' - two-scale field with M_{eps^nu}||_{L^p}
};

struct ConvergenceSeries {
    CorrectorKind kind = CorrectorKind::periodic;
    double nu = 1.0;
    double a_star = 0.0;
    double C_star = 0.0;
    std::vector<ConvergenceRecord> records;
};

/// 1D only. eps_list strictly decreasing in (0, 1]; 0 < nu <= 1.
ConvergenceSeries convergence_study(const Problem1D& prob_template,
                                    const std::vector<double>& eps_list, CorrectorKind kind,
                                    double nu = 1.0, unsigned threads = 0);

}  // namespace phom
