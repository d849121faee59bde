#pragma once

// Subcommand bodies of the command-line tool. Each returns the data payload
// (CSV or JSON text) plus timings and warnings for the manifest; numeric
// payloads depend only on the configuration and the seed.

#include "phom/config.hpp"
#include "phom/manifest.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace phom {

struct CommandResult {
    std::string payload;
    std::vector<StageTime> stages;
    std::vector<std::string> warnings;
    std::uint64_t seed = 0;
    int exit_code = 0;
};

enum ExitCode { kExitOk = 0, kExitOther = 1, kExitAssumption = 2, kExitNoConvergence = 3 };

/// %.{precision}g
std::string format_number(double v, int precision);

/// Report of inspect(); exit code 2 when an assumption fails.
CommandResult run_validate(const RunConfig& cfg);

struct IneqArgs {
    double p = 3.0;
    std::size_t samples = 1000000;
    std::uint64_t seed = 42;
    double delta = 1.0;
    bool battery = false;  // every inequality instead of the single lower bound for G
};
CommandResult run_ineq(const IneqArgs& args);

/// CSV columns eps, R_per_Linf, R_Linf, R_per_L2, R_L2, C_eps, C_star.
CommandResult run_oned(const RunConfig& cfg, const std::vector<double>& eps_list,
                       const std::string& format);

CommandResult run_cell(const RunConfig& cfg, const Vec& xi, int grid);

CommandResult run_defect(const RunConfig& cfg, const Vec& xi, double R);

/// CSV columns eps, L2_u_err, flux_res_1, flux_res_x, flux_res_sin, R_Linf, R_L2.
CommandResult run_homog(const RunConfig& cfg, const std::vector<double>& eps_list,
                        CorrectorKind kind, double nu, const std::string& format);

}  // namespace phom
