#pragma once

// One-dimensional pipeline. Everything here is explicit up to one scalar
// root: the flux constant of the oscillating problem.
//
// On an interval Omega with homogeneous Dirichlet data,
//
//     u_eps' = sp((-F + C_eps) / a(x/eps))^{1/(p-1)},   F(x) = int_lo^x f,
//
// where C_eps is the unique root of G(C) = int_Omega sp((-F + C)/a)^{1/(p-1)}.

#include "phom/coeffs.hpp"
#include "phom/numerics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace phom {

/// Right-hand side f with an optional closed-form primitive (any constant).
struct Rhs {
    std::function<double(double)> f;
    std::function<double(double)> primitive;  // may be empty
    std::string description;

    static Rhs zero();
    static Rhs constant(double c);
    /// slope * x + intercept
    static Rhs linear(double slope, double intercept = 0.0);
    /// amplitude * sin(frequency * pi * x)
    static Rhs sine(double amplitude, double frequency);
    static Rhs custom(std::function<double(double)> f, std::string description);
};

struct QuadratureSpec {
    int order = 8;
    int cells_per_period = 64;
    std::size_t min_cells = 1024;
};

/// F(x) = int_lo^x f. Closed form when the rhs provides one, otherwise
/// cumulative Gauss-Legendre panels.
class Antiderivative {
public:
    Antiderivative(Rhs rhs, Interval omega, std::size_t panels = 4096);

    double operator()(double x) const;
    double f(double x) const { return rhs_.f(x); }
    const Rhs& rhs() const { return rhs_; }
    Interval omega() const { return omega_; }

    /// Roots of F - level on Omega (sign changes on a fine scan, then bisection).
    std::vector<double> level_crossings(double level, std::size_t scan = 8192) const;

private:
    Rhs rhs_;
    Interval omega_;
    double h_ = 0.0;
    std::vector<double> cumulative_;  // F at panel breaks when tabulated
};

struct Problem1D {
    std::shared_ptr<const Coefficient> coefficient;
    Rhs rhs;
    double epsilon = 0.1;
    Interval omega{};
    QuadratureSpec quadrature{};

    double p() const { return coefficient->p(); }
};

struct FluxSolution1D {
    double C = 0.0;
    double p = 2.0;
    double residual = 0.0;  // |G(C)|
    int iterations = 0;
    std::shared_ptr<const Antiderivative> F;
    std::function<double(double)> a_of_x;  // a(x/eps), or the constant a*
    std::vector<double> sign_changes;       // roots of -F + C

    /// u' at x.
    double grad(double x) const;
    /// -F + C, the flux of the solution.
    double flux(double x) const { return -(*F)(x) + C; }
};

/// Number of quadrature cells for a problem at scale eps (0 means unscaled).
std::size_t quadrature_cells(const QuadratureSpec& q, Interval omega, double epsilon);

/// Throws BracketFailure if G has the wrong signs at the bracket ends.
FluxSolution1D solve_flux_constant(const Problem1D& prob);

/// (int_Q a_per^{-1/(p-1)})^{-(p-1)}
double homogenized_coefficient_1d(const PeriodicCoefficient& a_per, double p,
                                  const QuadratureSpec& q = {});

/// Same contract as solve_flux_constant with the constant coefficient a*.
FluxSolution1D solve_homogenized_1d(const Rhs& rhs, double a_star, double p, Interval omega,
                                    const QuadratureSpec& q = {});

enum class CorrectorKind { periodic, full };
const char* to_string(CorrectorKind kind);

/// w'_xi(y) = xi (a*/a_kind(y))^{1/(p-1)} - xi.
struct Corrector1D {
    double xi = 1.0;
    CorrectorKind kind = CorrectorKind::periodic;
    double a_star = 1.0;
    double p = 2.0;
    std::shared_ptr<const Coefficient> coefficient;

    double grad(double y) const;
    /// grad of the full corrector minus grad of the periodic one.
    double defect_grad(double y) const;
};

Corrector1D corrector_1d(double xi, std::shared_ptr<const Coefficient> c, CorrectorKind kind,
                         double a_star);

struct RemainderNorms {
    double linf = 0.0;
    double l2 = 0.0;
    double second_order_l1 = 0.0;  // || eps w(./eps) (u*)'' ||_{L^1}
};

struct RemainderReport {
    double epsilon = 0.0;
    double C_eps = 0.0;
    double C_star = 0.0;
    double a_star = 0.0;
    RemainderNorms periodic;
    RemainderNorms full;
    std::vector<double> singular_points;  // roots of -F + C*, where (u*)'' blows up
    std::size_t quadrature_nodes = 0;
    std::vector<std::string> warnings;

    const RemainderNorms& norms(CorrectorKind kind) const
    {
        return kind == CorrectorKind::periodic ? periodic : full;
    }
};

/// Quadrature rule shared by the remainder computations at scale eps,
/// with breaks at 0 and at every kink passed in.
CompositeRule remainder_rule(const Problem1D& prob, const std::vector<double>& kinks);

/// First-order remainder u_eps' - (u*)'(1 + w_1'(x/eps)) at the nodes of rule.
std::vector<double> first_order_remainder(const FluxSolution1D& u_eps,
                                          const FluxSolution1D& u_star,
                                          const Corrector1D& unit, double epsilon,
                                          const CompositeRule& rule);

RemainderReport remainder_report(const Problem1D& prob);

/// One report per eps, in input order. Runs up to `threads` eps in parallel.
std::vector<RemainderReport> table_sweep(const Problem1D& prob_template,
                                         const std::vector<double>& eps_list,
                                         unsigned threads = 0);

}  // namespace phom
