#include "phom/commands.hpp"

#include "phom/cell.hpp"
#include "phom/defect.hpp"
#include "phom/errors.hpp"
#include "phom/homog.hpp"
#include "phom/ineq.hpp"
#include "phom/oned.hpp"
#include "phom/parallel.hpp"

#include <cstdio>
#include <sstream>

namespace phom {

using nlohmann::json;

std::string format_number(double v, int precision)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

namespace {

json vec_json(const Vec& v)
{
    json a = json::array();
    for (int i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

json validation_json(const ValidationReport& r)
{
    json j;
    j["resolution"] = r.resolution;
    j["lambda"] = r.lambda;
    j["min_a"] = r.min_a;
    j["max_a"] = r.max_a;
    j["min_periodic"] = r.min_periodic;
    j["max_periodic"] = r.max_periodic;
    j["periodicity_residual"] = r.periodicity_residual;
    j["defect_tail_cauchy"] = r.defect_tail_cauchy;
    j["defect_lp_prime_norm"] = r.defect_lp_prime_norm;
    auto& tail = j["defect_tail"] = json::array();
    for (const auto& t : r.defect_tail)
        tail.push_back({{"radius", t.radius}, {"integral", t.integral}});
    j["violations"] = r.violations;
    j["passed"] = r.passed();
    return j;
}

// Checks the structural assumptions before any solve; throws AssumptionViolated.
std::shared_ptr<const Coefficient> checked_coefficient(const RunConfig& cfg, CommandResult& out)
{
    StageTimer t(out.stages, "validate");
    auto c = cfg.build_coefficient();
    validate(*c, cfg.validation_resolution());
    return c;
}

json lower_bound_json(const LowerBoundReport& r)
{
    return {{"p", r.p},           {"delta", r.delta},       {"seed", r.seed},
            {"samples", r.samples}, {"regime", r.regime},   {"feasible", r.feasible},
            {"gamma", r.gamma},   {"c", r.c},               {"violations", r.violations}};
}

}  // namespace

CommandResult run_validate(const RunConfig& cfg)
{
    CommandResult out;
    ValidationReport r;
    {
        StageTimer t(out.stages, "validate");
        r = inspect(*cfg.build_coefficient(), cfg.validation_resolution());
    }
    out.payload = dump(validation_json(r));
    out.warnings = r.violations;
    out.exit_code = r.passed() ? kExitOk : kExitAssumption;
    return out;
}

CommandResult run_ineq(const IneqArgs& args)
{
    CommandResult out;
    out.seed = args.seed;
    if (!args.battery) {
        LowerBoundReport r;
        {
            StageTimer t(out.stages, "lower_bound_G");
            r = check_lower_bound_G(args.p, args.delta, args.samples, args.seed, default_threads());
        }
        out.payload = dump(lower_bound_json(r));
        if (!r.feasible)
            out.warnings.push_back("no feasible (gamma, c) on the search grid");
        return out;
    }
    BatteryReport b;
    {
        StageTimer t(out.stages, "battery");
        b = run_battery(args.samples, args.seed, args.delta, default_threads());
    }
    json j;
    j["seed"] = b.seed;
    j["samples"] = b.samples;
    j["passed"] = b.passed();
    auto& ratios = j["ratios"] = json::array();
    for (const auto& r : b.ratios)
        ratios.push_back({{"name", r.name},
                          {"bound", r.lower ? "lower" : "upper"},
                          {"reference", r.reference},
                          {"margin", r.margin},
                          {"samples", r.samples},
                          {"violations", r.violations}});
    auto& breg = j["bregman_constants"] = json::array();
    for (const auto& g : b.bregman)
        breg.push_back({{"p", g.p}, {"c_est", g.c_est}, {"C_est", g.C_est}, {"min_g", g.min_g},
                        {"samples", g.samples}});
    auto& lem = j["lower_bound_G"] = json::array();
    for (const auto& r : b.lower_bound_G)
        lem.push_back(lower_bound_json(r));
    out.payload = dump(j);
    if (!b.passed())
        out.warnings.push_back("inequality battery reported violations");
    return out;
}

CommandResult run_oned(const RunConfig& cfg, const std::vector<double>& eps_list,
                       const std::string& format)
{
    CommandResult out;
    checked_coefficient(cfg, out);
    std::vector<RemainderReport> reps;
    {
        StageTimer t(out.stages, "sweep");
        reps = table_sweep(cfg.problem_1d(eps_list.front()), eps_list, default_threads());
    }
    for (const auto& r : reps)
        for (const auto& w : r.warnings)
            out.warnings.push_back("eps = " + format_number(r.epsilon, 6) + ": " + w);
    if (format == "json") {
        json a = json::array();
        for (const auto& r : reps)
            a.push_back({{"eps", r.epsilon},
                         {"C_eps", r.C_eps},
                         {"C_star", r.C_star},
                         {"a_star", r.a_star},
                         {"R_per_Linf", r.periodic.linf},
                         {"R_Linf", r.full.linf},
                         {"R_per_L2", r.periodic.l2},
                         {"R_L2", r.full.l2},
                         {"second_order_per_L1", r.periodic.second_order_l1},
                         {"second_order_L1", r.full.second_order_l1},
                         {"quadrature_nodes", r.quadrature_nodes}});
        out.payload = dump(a);
        return out;
    }
    const int pr = cfg.output.precision;
    std::ostringstream os;
    os << "eps,R_per_Linf,R_Linf,R_per_L2,R_L2,C_eps,C_star\n";
    for (const auto& r : reps)
        os << format_number(r.epsilon, pr) << ',' << format_number(r.periodic.linf, pr) << ','
           << format_number(r.full.linf, pr) << ',' << format_number(r.periodic.l2, pr) << ','
           << format_number(r.full.l2, pr) << ',' << format_number(r.C_eps, pr) << ','
           << format_number(r.C_star, pr) << '\n';
    out.payload = os.str();
    return out;
}

CommandResult run_cell(const RunConfig& cfg, const Vec& xi, int grid)
{
    CommandResult out;
    const auto c = checked_coefficient(cfg, out);
    if (xi.size() != c->dim())
        throw InvalidArgument("cell: --xi has " + std::to_string(xi.size()) +
                              " components, the coefficient is " + std::to_string(c->dim()) + "D");
    CellOptions opt = cfg.cell_options();
    if (grid > 0)
        opt.n = grid;
    CellSolve s;
    {
        StageTimer t(out.stages, "cell_solve");
        s = solve_cell(xi, c->periodic(), c->p(), opt);
    }
    double c_est = 1.0;
    if (xi.norm() > 0.0) {
        c_est = std::numeric_limits<double>::infinity();
        for (const Vec& z : s.corrected)
            c_est = std::min(c_est, z.norm() / xi.norm());
    }
    json j;
    j["xi"] = vec_json(xi);
    j["p"] = c->p();
    j["grid"] = s.field.grid.n();
    j["a_star"] = vec_json(s.homogenized_flux());
    j["energy"] = s.energy;
    j["residual"] = s.residual;
    j["iterations"] = s.iterations;
    j["c_est"] = c_est;
    if (c->dim() == 1)
        j["a_star_closed_form"] = homogenized_coefficient_1d(c->periodic(), c->p()) *
                                  signed_power(xi[0], c->p() - 1.0);
    out.payload = dump(j);
    return out;
}

CommandResult run_defect(const RunConfig& cfg, const Vec& xi, double R)
{
    CommandResult out;
    const auto c = checked_coefficient(cfg, out);
    if (xi.size() != c->dim())
        throw InvalidArgument("defect: --xi has the wrong number of components");
    DefectSetup setup = cfg.defect_setup(c);
    if (R > 0.0)
        setup.domain.R = R;
    DefectSolve s;
    {
        StageTimer t(out.stages, "defect_solve");
        s = solve_defect(xi, setup);
    }
    const TailReport tail = integrability_report(s);
    out.warnings = s.warnings;
    json j;
    j["xi"] = vec_json(xi);
    j["p"] = c->p();
    j["R"] = setup.domain.R;
    j["nodes_per_unit"] = setup.domain.nodes_per_unit;
    j["truncation"] = to_string(setup.domain.boundary);
    j["energy"] = s.energy;
    j["residual"] = s.residual;
    j["iterations"] = s.iterations;
    j["truncation_share"] = s.truncation_share;
    j["norms"] = {{"lp", s.norms.lp},
                  {"weighted_l2", s.norms.weighted_l2},
                  {"wu", s.norms.wu},
                  {"wu_from_annuli", s.norms.wu_from_annuli},
                  {"lp_prime", s.norms.lp_prime},
                  {"h_lp_prime", s.norms.h_lp_prime}};
    j["lp_prime_over_xi"] = tail.lp_prime_over_xi;
    auto& rows = j["tail"] = json::array();
    for (std::size_t k = 0; k < tail.annuli.size(); ++k) {
        const Annulus& a = tail.annuli[k];
        json row = {{"inner", a.inner},
                    {"outer", a.outer},
                    {"grad_p", a.grad_p},
                    {"grad_p_prime", a.grad_p_prime},
                    {"weighted", a.weighted},
                    {"cumulative_p_prime", tail.cumulative[k]}};
        if (k < tail.tail_ratios.size())
            row["ratio_next"] = tail.tail_ratios[k];
        rows.push_back(row);
    }
    j["warnings"] = s.warnings;
    out.payload = dump(j);
    return out;
}

CommandResult run_homog(const RunConfig& cfg, const std::vector<double>& eps_list,
                        CorrectorKind kind, double nu, const std::string& format)
{
    CommandResult out;
    checked_coefficient(cfg, out);
    ConvergenceSeries s;
    {
        StageTimer t(out.stages, "convergence_study");
        s = convergence_study(cfg.problem_1d(eps_list.front()), eps_list, kind, nu,
                              default_threads());
    }
    if (format == "json") {
        json j;
        j["kind"] = to_string(s.kind);
        j["nu"] = s.nu;
        j["a_star"] = s.a_star;
        j["C_star"] = s.C_star;
        auto& recs = j["records"] = json::array();
        for (const auto& r : s.records)
            recs.push_back({{"eps", r.eps},
                            {"delta", r.delta},
                            {"C_eps", r.C_eps},
                            {"Lp_u_err", r.Lp_u_err},
                            {"L2_u_err", r.L2_u_err},
                            {"flux_res_1", r.flux_res_1},
                            {"flux_res_x", r.flux_res_x},
                            {"flux_res_sin", r.flux_res_sin},
                            {"R_Linf", r.R_Linf},
                            {"R_L2", r.R_L2},
                            {"two_scale_Lp", r.two_scale_Lp}});
        out.payload = dump(j);
        return out;
    }
    const int pr = cfg.output.precision;
    std::ostringstream os;
    os << "eps,L2_u_err,flux_res_1,flux_res_x,flux_res_sin,R_Linf,R_L2\n";
    for (const auto& r : s.records)
        os << format_number(r.eps, pr) << ',' << format_number(r.L2_u_err, pr) << ','
           << format_number(r.flux_res_1, pr) << ',' << format_number(r.flux_res_x, pr) << ','
           << format_number(r.flux_res_sin, pr) << ',' << format_number(r.R_Linf, pr) << ','
           << format_number(r.R_L2, pr) << '\n';
    out.payload = os.str();
    return out;
}

}  // namespace phom
