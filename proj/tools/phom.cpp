// Command-line front end: phom <validate|ineq|oned|cell|defect|homog> [options]

#include "phom/commands.hpp"
#include "phom/errors.hpp"
#include "phom/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

struct Common {
    std::string config;
    std::string out;
    std::string manifest;
};

std::string infer_format(const std::string& path, const std::string& fallback)
{
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".json")
        return "json";
    if (ext == ".csv")
        return "csv";
    return fallback;
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw phom::Error("cannot write '" + path + "'");
    f << text;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical homogenization of p-Laplace problems with a periodic coefficient "
                 "and a localized defect"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", common.config, "configuration file");
        if (needs_config)
            opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "data file (CSV or JSON); stdout when omitted");
        sub->add_option("--manifest", common.manifest,
                        "manifest path (default: <out>.manifest.json)");
    };

    auto* validate = app.add_subcommand("validate", "check the coefficient assumptions");
    add_common(validate, true);

    phom::IneqArgs ineq_args;
    auto* ineq = app.add_subcommand("ineq", "randomized checks of the pointwise inequalities");
    add_common(ineq, false);
    ineq->add_option("--p", ineq_args.p, "exponent p >= 2")->check(CLI::Range(2.0, 1e6));
    ineq->add_option("--samples", ineq_args.samples, "number of seeded samples");
    ineq->add_option("--seed", ineq_args.seed, "random seed");
    ineq->add_option("--delta", ineq_args.delta, "lower bound on |xi| for 2 <= p < 3");
    ineq->add_flag("--battery", ineq_args.battery, "run every inequality over the exponent set");

    std::string eps_text;
    auto* oned = app.add_subcommand("oned", "1D remainder tables");
    add_common(oned, true);
    oned->add_option("--eps-list", eps_text, "comma-separated decreasing eps values");

    std::string xi_text;
    int grid = 0;
    auto* cell = app.add_subcommand("cell", "periodic cell problem");
    add_common(cell, true);
    cell->add_option("--xi", xi_text, "macroscopic gradient, comma separated")->required();
    cell->add_option("--grid", grid, "nodes per axis");

    double R = 0.0;
    auto* defect = app.add_subcommand("defect", "defect corrector on a truncated box");
    add_common(defect, true);
    defect->add_option("--xi", xi_text, "macroscopic gradient, comma separated")->required();
    defect->add_option("--R", R, "truncation radius");

    std::string kind_text;
    double nu = 0.0;
    auto* homog = app.add_subcommand("homog", "epsilon-convergence study (1D)");
    add_common(homog, true);
    homog->add_option("--eps-list", eps_text, "comma-separated decreasing eps values");
    homog->add_option("--kind", kind_text, "corrector kind")
        ->check(CLI::IsMember({"periodic", "full"}));
    homog->add_option("--nu", nu, "M_{eps^nu} exponent in (0, 1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? phom::kExitOk : phom::kExitOther;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    phom::RunManifest manifest;
    manifest.command = name;
    manifest.threads = phom::default_threads();
    phom::CommandResult result;
    std::string out_path = common.out;
    int code = phom::kExitOk;

    try {
        phom::RunConfig cfg;
        if (!common.config.empty()) {
            cfg = phom::parse_config(common.config);
            manifest.config_path = common.config;
            manifest.config_hash = phom::sha256_hex(cfg.source_text);
            manifest.seed = cfg.solver.seed;
            if (out_path.empty())
                out_path = cfg.output.path;
        }
        const std::string format = infer_format(out_path, cfg.output.format);
        std::vector<double> eps = cfg.problem.eps_list;
        if (!eps_text.empty())
            eps = phom::parse_number_list(eps_text, "--eps-list");
        for (std::size_t i = 0; i < eps.size(); ++i)
            if (!(eps[i] > 0.0 && eps[i] <= 1.0) || (i > 0 && !(eps[i] < eps[i - 1])))
                throw phom::ConfigError("--eps-list", "must be strictly decreasing in (0, 1]");

        if (name == "validate") {
            result = phom::run_validate(cfg);
        } else if (name == "ineq") {
            if (!common.config.empty()) {
                if (ineq->count("--seed") == 0)
                    ineq_args.seed = cfg.solver.seed;
                if (ineq->count("--samples") == 0)
                    ineq_args.samples = cfg.solver.samples;
                if (ineq->count("--delta") == 0)
                    ineq_args.delta = cfg.solver.delta;
                if (ineq->count("--p") == 0)
                    ineq_args.p = cfg.p;
            }
            manifest.seed = ineq_args.seed;
            result = phom::run_ineq(ineq_args);
        } else if (name == "oned") {
            result = phom::run_oned(cfg, eps, format);
        } else if (name == "cell") {
            const auto v = phom::parse_number_list(xi_text, "--xi");
            result = phom::run_cell(cfg, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), grid);
        } else if (name == "defect") {
            const auto v = phom::parse_number_list(xi_text, "--xi");
            result = phom::run_defect(cfg, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), R);
        } else if (name == "homog") {
            phom::CorrectorKind kind = cfg.problem.kind;
            if (!kind_text.empty())
                kind = kind_text == "full" ? phom::CorrectorKind::full : phom::CorrectorKind::periodic;
            result = phom::run_homog(cfg, eps, kind, nu > 0.0 ? nu : cfg.problem.nu, format);
        }
        code = result.exit_code;
        manifest.stages = result.stages;
        manifest.warnings = result.warnings;
        manifest.payload_hash = phom::sha256_hex(result.payload);
        if (out_path.empty())
            std::cout << result.payload;
        else
            write_file(out_path, result.payload);
        for (const auto& w : result.warnings)
            std::cerr << "phom " << name << ": warning: " << w << '\n';
    } catch (const phom::ConfigError& e) {
        for (const auto& [field, reason] : e.violations())
            std::cerr << "phom " << name << ": config: " << field << ": " << reason << '\n';
        manifest.warnings.push_back(e.what());
        code = phom::kExitOther;
    } catch (const phom::AssumptionViolated& e) {
        std::cerr << "phom " << name << ": assumption violated: " << e.what() << '\n';
        manifest.warnings.push_back(e.what());
        code = phom::kExitAssumption;
    } catch (const phom::NoConvergence& e) {
        std::cerr << "phom " << name << ": " << e.what() << '\n';
        manifest.warnings.push_back(e.what());
        code = phom::kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "phom " << name << ": error: " << e.what() << '\n';
        manifest.warnings.push_back(e.what());
        code = phom::kExitOther;
    }

    manifest.exit_code = code;
    manifest.output_path = out_path;
    std::string manifest_path = common.manifest;
    if (manifest_path.empty() && !out_path.empty())
        manifest_path = out_path + ".manifest.json";
    if (!manifest_path.empty()) {
        try {
            write_file(manifest_path, manifest.to_json().dump(2) + "\n");
        } catch (const std::exception& e) {
            std::cerr << "phom " << name << ": " << e.what() << '\n';
            return phom::kExitOther;
        }
    }
    return code;
}
