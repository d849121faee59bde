#include "phom/manifest.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;  // stdout and stderr
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(PHOM_BINARY) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string config(const char* name)
{
    return std::string(PHOM_CONFIG_DIR) + "/" + name;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("phom_cli_" + std::to_string(::getpid())))
    {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("assumption violations exit with code 2")
{
    const auto r = run("validate --config " + config("bad_lambda.ini"));
    CHECK(r.code == 2);
    const auto o = run("oned --config " + config("bad_lambda.ini") + " --eps-list 0.1");
    CHECK(o.code == 2);
    CHECK(o.out.find("assumption violated") != std::string::npos);
}

TEST_CASE("config errors are listed together and exit with code 1")
{
    TempDir tmp;
    const auto ini = tmp.path / "bad.ini";
    std::ofstream(ini) << "p = 1.5\n";
    const auto r = run("validate --config " + ini.string());
    CHECK(r.code == 1);
    CHECK(r.out.find("p: requires p >= 2") != std::string::npos);
    CHECK(r.out.find("coefficient: missing section") != std::string::npos);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("oned --config " + config("reference_1d.ini") + " --eps-list 0.01,0.1").code == 1);
    CHECK(run("ineq --p 1.5").code == 1);
}

TEST_CASE("manifest hashes follow the config and the payload")
{
    TempDir tmp;
    const auto ini = tmp.path / "run.ini";
    const std::string text = slurp(config("reference_1d.ini"));
    std::ofstream(ini) << text;
    const auto out = tmp.path / "table.csv";
    const std::string args = "oned --config " + ini.string() + " --eps-list 0.1,0.05 --out " + out.string();
    REQUIRE(run(args).code == 0);
    const auto m1 = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(m1["config_hash"] == phom::sha256_hex(text));
    CHECK(m1["payload_hash"] == phom::sha256_hex(slurp(out)));
    CHECK(m1["seed"] == 42);
    CHECK(m1["exit_code"] == 0);
    CHECK(slurp(out).rfind("eps,R_per_Linf,R_Linf,R_per_L2,R_L2,C_eps", 0) == 0);

    REQUIRE(run(args).code == 0);
    const auto m2 = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(m2["config_hash"] == m1["config_hash"]);
    CHECK(m2["payload_hash"] == m1["payload_hash"]);

    std::ofstream(ini) << text << "; edited\n";
    REQUIRE(run(args).code == 0);
    const auto m3 = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(m3["config_hash"] != m1["config_hash"]);
    CHECK(m3["payload_hash"] == m1["payload_hash"]);
}

TEST_CASE("JSON output and explicit manifest path")
{
    TempDir tmp;
    const auto out = tmp.path / "cell.json";
    const auto man = tmp.path / "m.json";
    const auto r = run("cell --config " + config("laminate_2d.ini") + " --xi 0,1 --out " +
                       out.string() + " --manifest " + man.string());
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["c_est"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fs::exists(man));
    CHECK_FALSE(fs::exists(out.string() + ".manifest.json"));
}

TEST_CASE("inequality subcommand reports a feasible lower bound")
{
    const auto r = run("ineq --p 3 --samples 20000 --seed 5");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["feasible"] == true);
    CHECK(j["regime"] == "global");
    CHECK(j["seed"] == 5);
}
