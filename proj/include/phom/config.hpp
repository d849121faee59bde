#pragma once

// Run configuration: an INI-style file (see docs/config.md), parsed in full
// before any violation is reported.

#include "phom/cell.hpp"
#include "phom/coeffs.hpp"
#include "phom/defect.hpp"
#include "phom/oned.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace phom {

struct CoefficientConfig {
    int dim = 1;
    std::string periodic = "cosine";  // constant | cosine | laminate | product_cosine | grid
    double mean = 2.0;
    double amplitude = 1.0;
    double lambda = 0.0;
    std::string grid_file;            // resolved against the config directory
    std::string defect = "none";      // none | exponential | gaussian
    double defect_amplitude = 0.0;
    double defect_rate = 1.0;
    double defect_width = 1.0;
    double tail_bound = 1e-6;
};

struct ProblemConfig {
    std::string rhs = "linear";       // zero | constant | linear | sine
    double rhs_value = 0.0;
    double rhs_slope = 2.0;
    double rhs_intercept = 0.0;
    double rhs_amplitude = 1.0;
    double rhs_frequency = 1.0;
    double omega_lo = -0.5;
    double omega_hi = 0.5;
    std::vector<double> eps_list{0.1, 0.05, 0.01, 0.005, 0.001, 0.0005};
    CorrectorKind kind = CorrectorKind::periodic;
    double nu = 1.0;
};

struct SolverConfig {
    int cell_grid = 0;            // 0: default per dimension
    int defect_nodes_per_unit = 0;
    double R = 0.0;               // 0: decay radius + 16 periods
    Truncation truncation = Truncation::natural;
    double tol = 1e-9;
    int max_iter = 500;
    int validation_resolution = 0;
    int quadrature_order = 8;
    int cells_per_period = 64;
    std::uint64_t seed = 42;
    std::size_t samples = 1000000;
    double delta = 1.0;
    double gamma_est = 0.0;       // 0: estimated from cell solves
};

struct OutputConfig {
    std::string format = "csv";   // csv | json
    std::string path;
    int precision = 6;
};

struct RunConfig {
    double p = 2.0;
    CoefficientConfig coefficient;
    ProblemConfig problem;
    SolverConfig solver;
    OutputConfig output;

    std::string source_path;
    std::string source_text;  // raw bytes, hashed into the manifest

    std::shared_ptr<const Coefficient> build_coefficient() const;
    Rhs build_rhs() const;
    Problem1D problem_1d(double eps) const;
    CellOptions cell_options() const;
    DefectSetup defect_setup(std::shared_ptr<const Coefficient> c) const;
    int validation_resolution() const;
};

/// Throws ConfigError listing every violation found.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");

/// "0.1, 0.05 ,1e-3" -> {0.1, 0.05, 0.001}; throws ConfigError(field, ...).
std::vector<double> parse_number_list(const std::string& text, const std::string& field);

}  // namespace phom
