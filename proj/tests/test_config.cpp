#include "phom/config.hpp"
#include "phom/errors.hpp"
#include "phom/manifest.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

using namespace phom;

namespace {

bool has_field(const ConfigError& e, const std::string& field)
{
    return std::any_of(e.violations().begin(), e.violations().end(),
                       [&](const auto& v) { return v.first == field; });
}

ConfigError error_of(const std::string& text)
{
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("no ConfigError for:\n" << text);
    return ConfigError("", "");
}

}  // namespace

TEST_CASE("reference configuration parses with every field")
{
    const auto c = parse_config(PHOM_SOURCE_DIR "/configs/reference_1d.ini");
    CHECK(c.p == 3.0);
    CHECK(c.coefficient.periodic == "cosine");
    CHECK(c.coefficient.lambda == 14.0);
    CHECK(c.coefficient.defect == "exponential");
    CHECK(c.coefficient.defect_amplitude == 10.0);
    CHECK(c.problem.eps_list == std::vector<double>{0.1, 0.05, 0.01, 0.005, 0.001, 0.0005});
    CHECK(c.problem.kind == CorrectorKind::full);
    CHECK(c.solver.R == 20.0);
    CHECK(c.solver.seed == 42);
    CHECK(c.output.precision == 6);
    const auto coef = c.build_coefficient();
    CHECK(coef->at(0.0) == doctest::Approx(13.0));
    const auto prob = c.problem_1d(0.01);
    CHECK(prob.epsilon == 0.01);
    CHECK(prob.rhs.f(0.25) == doctest::Approx(0.5));
    const auto setup = c.defect_setup(coef);
    CHECK(setup.domain.R == 20.0);
    CHECK(setup.domain.nodes_per_unit == 128);
    CHECK(c.validation_resolution() == 1024);
}

TEST_CASE("minimal configuration falls back to defaults")
{
    const auto c = parse_config_text("p = 2.5\n[coefficient]\nlambda = 4\n");
    CHECK(c.p == 2.5);
    CHECK(c.coefficient.dim == 1);
    CHECK(c.problem.kind == CorrectorKind::periodic);
    CHECK(c.solver.truncation == Truncation::natural);
    CHECK(c.solver.tol == 1e-9);
    CHECK(c.output.format == "csv");
    CHECK(c.defect_setup(c.build_coefficient()).domain.R == 16.0);
}

TEST_CASE("every violation is reported at once")
{
    const auto e = error_of("p = 1.5\n");
    CHECK(has_field(e, "p"));
    CHECK(has_field(e, "coefficient"));

    const auto e2 = error_of("p = 3\nfoo = 1\n[coefficient]\nlambda = 0.5\nbogus = 2\n"
                             "[problem]\neps_list = 0.1, 0.2\nnu = 0\n[solver]\ntol = x\n"
                             "quadrature_order = 5\n[extra]\nk = 1\n");
    for (const char* f : {"foo", "coefficient.lambda", "coefficient.bogus", "problem.eps_list",
                          "problem.nu", "solver.tol", "solver.quadrature_order", "extra"})
        CHECK_MESSAGE(has_field(e2, f), f);
    CHECK(e2.violations().size() >= 8);

    const auto e3 = error_of("p = 3\n[coefficient]\nlambda = 4\nperiodic = grid\n"
                             "defect = gaussian\ndefect_width = -1\n[output]\nformat = xml\n");
    CHECK(has_field(e3, "coefficient.grid_file"));
    CHECK(has_field(e3, "coefficient.defect_width"));
    CHECK(has_field(e3, "output.format"));
}

TEST_CASE("grid files resolve against the config directory")
{
    const auto dir = std::filesystem::temp_directory_path() / "phom_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "a.txt") << "1 4\n2 3 2 1\n";
        std::ofstream(dir / "run.ini") << "p = 3\n[coefficient]\nperiodic = grid\n"
                                          "grid_file = a.txt\nlambda = 5\n";
    }
    const auto c = parse_config((dir / "run.ini").string());
    CHECK(std::filesystem::path(c.coefficient.grid_file) == dir / "a.txt");
    CHECK(c.build_coefficient()->at(-0.5) == doctest::Approx(2.0));
    std::filesystem::remove_all(dir);
}

TEST_CASE("number lists")
{
    CHECK(parse_number_list("0.1, 0.05 ,1e-3", "x") == std::vector<double>{0.1, 0.05, 1e-3});
    CHECK_THROWS_AS(parse_number_list("0.1,,2", "x"), ConfigError);
    CHECK_THROWS_AS(parse_number_list("", "x"), ConfigError);
    CHECK_THROWS_AS(parse_config("/nonexistent/phom.ini"), ConfigError);
}

TEST_CASE("sha256 and manifest layout")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    RunManifest m;
    m.command = "oned";
    m.seed = 42;
    m.stages.push_back({"sweep", 1.5});
    const auto j = m.to_json();
    CHECK(j["command"] == "oned");
    CHECK(j["seed"] == 42);
    CHECK(j["stages"][0]["name"] == "sweep");
    CHECK(j["module_versions"].size() >= 6);
}
