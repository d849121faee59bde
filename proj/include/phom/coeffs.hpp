#pragma once

// Coefficient model a = a_per + a_defect, plus checks of the bounds,
// periodicity and decay that the homogenization theory needs.

#include "phom/numerics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace phom {

using ScalarField = std::function<double(const Vec&)>;

/// 1-periodic scalar coefficient on R^d with a declared coercivity bound lambda:
/// lambda^{-1} < a_per < lambda is required (and checked by validate()).
class PeriodicCoefficient {
public:
    PeriodicCoefficient(int dim, ScalarField evaluator, double lambda, double lipschitz,
                        std::string description, bool constant = false);

    static PeriodicCoefficient constant(int dim, double value, double lambda);
    /// mean + amplitude * (1/d) sum_i cos(2 pi y_i)
    static PeriodicCoefficient cosine(int dim, double mean, double amplitude, double lambda);
    /// Laminate a_0(y_1) = mean + amplitude * cos(2 pi y_1), independent of y_2..y_d.
    static PeriodicCoefficient laminate(int dim, double mean, double amplitude, double lambda);
    /// mean + amplitude * prod_i cos(2 pi y_i)
    static PeriodicCoefficient product_cosine(int dim, double mean, double amplitude,
                                              double lambda);
    /// Values at the nodes -1/2 + i/n (row-major, first axis slowest), periodic
    /// multilinear interpolation in between.
    static PeriodicCoefficient tabulated(int dim, int resolution, std::vector<double> values,
                                         double lambda);
    /// Plain-text grid file: "d n" header followed by n^d values.
    static PeriodicCoefficient read_tabulated(const std::string& path, double lambda);

    double operator()(const Vec& y) const { return eval_(y); }
    int dim() const { return dim_; }
    double lambda() const { return lambda_; }
    double lipschitz() const { return lipschitz_; }
    const std::string& description() const { return description_; }
    bool is_constant() const { return constant_; }

private:
    int dim_;
    ScalarField eval_;
    double lambda_;
    double lipschitz_;
    std::string description_;
    bool constant_;
};

/// Localized perturbation of the periodic coefficient, vanishing at infinity.
/// |a_defect(y)| is below the declared tail bound for |y| >= decay_radius().
class DefectCoefficient {
public:
    DefectCoefficient(int dim, ScalarField evaluator, double decay_radius, std::string description);

    /// amplitude * exp(-rate |y|)
    static DefectCoefficient exponential(int dim, double amplitude, double rate,
                                         double tail_bound = 1e-6);
    /// amplitude * exp(-|y|^2 / width^2)
    static DefectCoefficient gaussian(int dim, double amplitude, double width,
                                      double tail_bound = 1e-6);

    double operator()(const Vec& y) const { return eval_(y); }
    int dim() const { return dim_; }
    double decay_radius() const { return decay_radius_; }
    const std::string& description() const { return description_; }

    /// Quadrature estimate of int_{|y|_inf < radius} |a_defect|^q.
    double power_integral(double q, double radius, int cells_per_axis) const;

private:
    int dim_;
    ScalarField eval_;
    double decay_radius_;
    std::string description_;
};

class Coefficient {
public:
    /// Throws InvalidArgument when p < 2 or the dimensions disagree.
    Coefficient(PeriodicCoefficient periodic, std::optional<DefectCoefficient> defect, double p);

    double operator()(const Vec& y) const;
    double at(double y) const;  // 1D convenience

    double periodic_at(const Vec& y) const { return periodic_(y); }
    double defect_at(const Vec& y) const { return defect_ ? (*defect_)(y) : 0.0; }

    const PeriodicCoefficient& periodic() const { return periodic_; }
    const std::optional<DefectCoefficient>& defect() const { return defect_; }
    bool has_defect() const { return defect_.has_value(); }
    double p() const { return p_; }
    int dim() const { return periodic_.dim(); }
    double lambda() const { return periodic_.lambda(); }

    /// Same coefficient with the defect removed.
    Coefficient periodic_only() const;

private:
    PeriodicCoefficient periodic_;
    std::optional<DefectCoefficient> defect_;
    double p_;
};

struct TailSample {
    double radius;
    double integral;  // int_{|y|_inf < radius} |a_defect|^{p'}
};

struct ValidationReport {
    int resolution = 0;
    double lambda = 0.0;
    double min_a = 0.0, max_a = 0.0;
    double min_periodic = 0.0, max_periodic = 0.0;
    double periodicity_residual = 0.0;
    std::vector<TailSample> defect_tail;
    double defect_tail_cauchy = 0.0;  // relative change between the two largest boxes
    double defect_lp_prime_norm = 0.0;
    std::vector<std::string> violations;

    bool passed() const { return violations.empty(); }
};

int default_validation_resolution(int dim);

/// Samples the coefficient on uniform grids and reports every violated assumption.
ValidationReport inspect(const Coefficient& c, int grid_resolution);

/// As inspect(), but throws AssumptionViolated when any assumption fails.
ValidationReport validate(const Coefficient& c, int grid_resolution);

/// max |a_defect(y)| over grid samples with radius <= |y|_inf <= outer.
double defect_tail_max(const DefectCoefficient& defect, double radius, double outer,
                       int samples_per_axis);

}  // namespace phom
