#include "phom/config.hpp"

#include "phom/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace phom {

namespace {

using Violations = std::vector<ConfigError::Violation>;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool to_double(const std::string& text, double& out)
{
    const std::string t = trim(text);
    if (t.empty())
        return false;
    const char* first = t.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

template <class Int>
bool to_int(const std::string& text, Int& out)
{
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return !t.empty() && ec == std::errc() && ptr == t.data() + t.size();
}

// Setter for one key: parses the raw value, returns a reason on failure.
using Setter = std::function<std::string(const std::string&)>;

Setter real(double& dst)
{
    return [&dst](const std::string& v) -> std::string {
        return to_double(v, dst) ? "" : "not a number: '" + v + "'";
    };
}

template <class Int>
Setter integer(Int& dst)
{
    return [&dst](const std::string& v) -> std::string {
        return to_int(v, dst) ? "" : "not an integer: '" + v + "'";
    };
}

Setter plain(std::string& dst)
{
    return [&dst](const std::string& v) -> std::string {
        dst = trim(v);
        return "";
    };
}

Setter choice(std::string& dst, std::vector<std::string> allowed)
{
    return [&dst, allowed](const std::string& v) -> std::string {
        const std::string t = trim(v);
        for (const auto& a : allowed)
            if (t == a) {
                dst = t;
                return "";
            }
        std::string msg = "unknown value '" + t + "' (expected one of:";
        for (const auto& a : allowed)
            msg += " " + a;
        return msg + ")";
    };
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& field)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!to_double(item, v))
            throw ConfigError(field, "not a number: '" + trim(item) + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw ConfigError(field, "empty list");
    return out;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path().string();
    RunConfig c = parse_config_text(buf.str(), dir.empty() ? "." : dir);
    c.source_path = path;
    return c;
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir)
{
    RunConfig c;
    c.source_text = text;
    boost::property_tree::ptree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
    }

    Violations bad;
    std::string kind = "periodic", truncation = "natural", eps_text;
    bool have_p = false, have_lambda = false;

    std::map<std::string, std::map<std::string, Setter>> keys;
    auto& co = c.coefficient;
    auto& pr = c.problem;
    auto& so = c.solver;
    auto& ou = c.output;
    keys[""]["p"] = [&](const std::string& v) {
        have_p = true;
        return real(c.p)(v);
    };
    keys["coefficient"] = {
        {"dim", integer(co.dim)},
        {"periodic", choice(co.periodic, {"constant", "cosine", "laminate", "product_cosine", "grid"})},
        {"mean", real(co.mean)},
        {"amplitude", real(co.amplitude)},
        {"lambda", [&](const std::string& v) {
             have_lambda = true;
             return real(co.lambda)(v);
         }},
        {"grid_file", plain(co.grid_file)},
        {"defect", choice(co.defect, {"none", "exponential", "gaussian"})},
        {"defect_amplitude", real(co.defect_amplitude)},
        {"defect_rate", real(co.defect_rate)},
        {"defect_width", real(co.defect_width)},
        {"tail_bound", real(co.tail_bound)},
    };
    keys["problem"] = {
        {"rhs", choice(pr.rhs, {"zero", "constant", "linear", "sine"})},
        {"rhs_value", real(pr.rhs_value)},
        {"rhs_slope", real(pr.rhs_slope)},
        {"rhs_intercept", real(pr.rhs_intercept)},
        {"rhs_amplitude", real(pr.rhs_amplitude)},
        {"rhs_frequency", real(pr.rhs_frequency)},
        {"omega_lo", real(pr.omega_lo)},
        {"omega_hi", real(pr.omega_hi)},
        {"eps_list", plain(eps_text)},
        {"kind", choice(kind, {"periodic", "full"})},
        {"nu", real(pr.nu)},
    };
    keys["solver"] = {
        {"cell_grid", integer(so.cell_grid)},
        {"defect_nodes_per_unit", integer(so.defect_nodes_per_unit)},
        {"R", real(so.R)},
        {"truncation", choice(truncation, {"natural", "dirichlet"})},
        {"tol", real(so.tol)},
        {"max_iter", integer(so.max_iter)},
        {"validation_resolution", integer(so.validation_resolution)},
        {"quadrature_order", integer(so.quadrature_order)},
        {"cells_per_period", integer(so.cells_per_period)},
        {"seed", integer(so.seed)},
        {"samples", integer(so.samples)},
        {"delta", real(so.delta)},
        {"gamma_est", real(so.gamma_est)},
    };
    keys["output"] = {
        {"format", choice(ou.format, {"csv", "json"})},
        {"path", plain(ou.path)},
        {"precision", integer(ou.precision)},
    };

    bool have_coefficient = false;
    for (const auto& [name, node] : tree) {
        if (node.empty() && node.data().empty() && !name.empty() && keys.count(name)) {
            // section without keys
            have_coefficient = have_coefficient || name == "coefficient";
            continue;
        }
        if (node.empty()) {
            // top-level key
            const auto it = keys[""].find(name);
            if (it == keys[""].end())
                bad.emplace_back(name, "unknown key");
            else if (auto why = it->second(node.data()); !why.empty())
                bad.emplace_back(name, why);
            continue;
        }
        const auto sec = keys.find(name);
        if (sec == keys.end() || name.empty()) {
            bad.emplace_back(name, "unknown section");
            continue;
        }
        if (name == "coefficient")
            have_coefficient = true;
        for (const auto& [key, leaf] : node) {
            const std::string field = name + "." + key;
            const auto it = sec->second.find(key);
            if (it == sec->second.end())
                bad.emplace_back(field, "unknown key");
            else if (auto why = it->second(leaf.data()); !why.empty())
                bad.emplace_back(field, why);
        }
    }

    if (!have_p)
        bad.emplace_back("p", "missing");
    else if (!(c.p >= 2.0))
        bad.emplace_back("p", "requires p >= 2");
    if (!have_coefficient) {
        bad.emplace_back("coefficient", "missing section");
    } else {
        if (co.dim < 1 || co.dim > 3)
            bad.emplace_back("coefficient.dim", "must be 1, 2 or 3");
        if (!have_lambda)
            bad.emplace_back("coefficient.lambda", "missing");
        else if (!(co.lambda > 1.0))
            bad.emplace_back("coefficient.lambda", "must exceed 1");
        if (co.periodic == "grid") {
            if (co.grid_file.empty())
                bad.emplace_back("coefficient.grid_file", "required when periodic = grid");
            else if (std::filesystem::path(co.grid_file).is_relative())
                co.grid_file = (std::filesystem::path(base_dir) / co.grid_file).string();
        }
        if (co.defect != "none" && !(co.tail_bound > 0.0))
            bad.emplace_back("coefficient.tail_bound", "must be positive");
        if (co.defect == "exponential" && !(co.defect_rate > 0.0))
            bad.emplace_back("coefficient.defect_rate", "must be positive");
        if (co.defect == "gaussian" && !(co.defect_width > 0.0))
            bad.emplace_back("coefficient.defect_width", "must be positive");
    }
    if (!(pr.omega_lo < pr.omega_hi))
        bad.emplace_back("problem.omega_hi", "must exceed omega_lo");
    if (!eps_text.empty()) {
        try {
            pr.eps_list = parse_number_list(eps_text, "problem.eps_list");
        } catch (const ConfigError& e) {
            bad.insert(bad.end(), e.violations().begin(), e.violations().end());
        }
    }
    for (std::size_t i = 0; i < pr.eps_list.size(); ++i)
        if (!(pr.eps_list[i] > 0.0 && pr.eps_list[i] <= 1.0) ||
            (i > 0 && !(pr.eps_list[i] < pr.eps_list[i - 1]))) {
            bad.emplace_back("problem.eps_list", "must be strictly decreasing in (0, 1]");
            break;
        }
    pr.kind = kind == "full" ? CorrectorKind::full : CorrectorKind::periodic;
    if (!(pr.nu > 0.0 && pr.nu <= 1.0))
        bad.emplace_back("problem.nu", "must lie in (0, 1]");
    so.truncation = truncation == "dirichlet" ? Truncation::dirichlet : Truncation::natural;
    if (!(so.tol > 0.0))
        bad.emplace_back("solver.tol", "must be positive");
    if (so.max_iter < 1)
        bad.emplace_back("solver.max_iter", "must be positive");
    if (so.cell_grid < 0 || so.cell_grid == 1)
        bad.emplace_back("solver.cell_grid", "must be 0 (default) or at least 2");
    if (so.defect_nodes_per_unit != 0 && so.defect_nodes_per_unit < 16)
        bad.emplace_back("solver.defect_nodes_per_unit", "must be 0 (default) or at least 16");
    if (so.R < 0.0)
        bad.emplace_back("solver.R", "must be nonnegative");
    if (so.validation_resolution != 0 && so.validation_resolution < 2)
        bad.emplace_back("solver.validation_resolution", "must be 0 (default) or at least 2");
    if (so.quadrature_order != 4 && so.quadrature_order != 8)
        bad.emplace_back("solver.quadrature_order", "must be 4 or 8");
    if (so.cells_per_period < 1)
        bad.emplace_back("solver.cells_per_period", "must be positive");
    if (so.samples < 1)
        bad.emplace_back("solver.samples", "must be positive");
    if (!(so.delta > 0.0))
        bad.emplace_back("solver.delta", "must be positive");
    if (so.gamma_est < 0.0 || so.gamma_est > 1.0)
        bad.emplace_back("solver.gamma_est", "must lie in [0, 1]");
    if (ou.precision < 1 || ou.precision > 17)
        bad.emplace_back("output.precision", "must lie in [1, 17]");

    if (!bad.empty())
        throw ConfigError(std::move(bad));
    return c;
}

std::shared_ptr<const Coefficient> RunConfig::build_coefficient() const
{
    const auto& co = coefficient;
    std::optional<PeriodicCoefficient> per;
    if (co.periodic == "constant")
        per = PeriodicCoefficient::constant(co.dim, co.mean, co.lambda);
    else if (co.periodic == "cosine")
        per = PeriodicCoefficient::cosine(co.dim, co.mean, co.amplitude, co.lambda);
    else if (co.periodic == "laminate")
        per = PeriodicCoefficient::laminate(co.dim, co.mean, co.amplitude, co.lambda);
    else if (co.periodic == "product_cosine")
        per = PeriodicCoefficient::product_cosine(co.dim, co.mean, co.amplitude, co.lambda);
    else
        per = PeriodicCoefficient::read_tabulated(co.grid_file, co.lambda);
    if (per->dim() != co.dim)
        throw ConfigError("coefficient.grid_file", "grid dimension differs from coefficient.dim");

    std::optional<DefectCoefficient> def;
    if (co.defect == "exponential")
        def = DefectCoefficient::exponential(co.dim, co.defect_amplitude, co.defect_rate,
                                             co.tail_bound);
    else if (co.defect == "gaussian")
        def = DefectCoefficient::gaussian(co.dim, co.defect_amplitude, co.defect_width,
                                          co.tail_bound);
    return std::make_shared<const Coefficient>(std::move(*per), std::move(def), p);
}

Rhs RunConfig::build_rhs() const
{
    const auto& pr = problem;
    if (pr.rhs == "zero")
        return Rhs::zero();
    if (pr.rhs == "constant")
        return Rhs::constant(pr.rhs_value);
    if (pr.rhs == "sine")
        return Rhs::sine(pr.rhs_amplitude, pr.rhs_frequency);
    return Rhs::linear(pr.rhs_slope, pr.rhs_intercept);
}

Problem1D RunConfig::problem_1d(double eps) const
{
    Problem1D prob;
    prob.coefficient = build_coefficient();
    if (prob.coefficient->dim() != 1)
        throw ConfigError("coefficient.dim", "the oscillating problem is one-dimensional");
    prob.rhs = build_rhs();
    prob.epsilon = eps;
    prob.omega = {problem.omega_lo, problem.omega_hi};
    prob.quadrature.order = solver.quadrature_order;
    prob.quadrature.cells_per_period = solver.cells_per_period;
    return prob;
}

CellOptions RunConfig::cell_options() const
{
    CellOptions o;
    o.n = solver.cell_grid;
    o.minimize.tol = solver.tol;
    o.minimize.max_iter = solver.max_iter;
    return o;
}

DefectSetup RunConfig::defect_setup(std::shared_ptr<const Coefficient> c) const
{
    DefectSetup s;
    s.domain.dim = c->dim();
    s.domain.R = solver.R > 0.0 ? solver.R : default_truncation_radius(*c);
    s.domain.nodes_per_unit = solver.defect_nodes_per_unit > 0
                                  ? solver.defect_nodes_per_unit
                                  : default_defect_nodes_per_unit(c->dim());
    s.domain.boundary = solver.truncation;
    s.coefficient = std::move(c);
    s.cell = cell_options();
    s.minimize.tol = solver.tol;
    s.minimize.max_iter = solver.max_iter;
    return s;
}

int RunConfig::validation_resolution() const
{
    return solver.validation_resolution > 0 ? solver.validation_resolution
                                            : default_validation_resolution(coefficient.dim);
}

}  // namespace phom
