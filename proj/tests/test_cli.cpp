#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "json.hpp"

#include "angio/cli.hpp"
#include "angio/io.hpp"

using namespace angio;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "angiolab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path("cli_scratch") / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
    const auto path = dir / "config.yaml";
    io::write_file(path, text);
    return path.string();
}

json manifest(const fs::path& dir) { return json::parse(io::read_file(dir / "manifest.json")); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("mu1 with defaults") {
    const auto dir = scratch("mu1");
    const auto r = cli({"mu1", "--output", (dir / "out").string()});
    CHECK(r.code == 0);
    CHECK(std::abs(std::stod(r.out) - std::tanh(1.0)) < 1e-4);
    const auto m = manifest(dir / "out");
    CHECK(m["status"] == "ok");
    CHECK(m["exit_code"] == 0);
    CHECK(m["subcommand"] == "mu1");
    CHECK(m.contains("wall_time_s"));
    CHECK(m["versions"].contains("eigen"));
    CHECK(m["config"]["grid"]["n"] == 513);
}

TEST_CASE("eigen writes the alpha table") {
    const auto dir = scratch("eigen");
    const auto cfg = write_config(dir, "grid: {n: 257}\nexperiment: {mu_list: [0, 0.5]}\n");
    CHECK(cli({"eigen", "-c", cfg, "-o", (dir / "out").string()}).code == 0);
    const auto csv = io::read_file(dir / "out" / "alpha.csv");
    CHECK(csv.rfind("mu,alpha\n0,", 0) == 0);
    const auto j = json::parse(io::read_file(dir / "out" / "alpha.json"));
    for (const auto& row : j["rows"]) {
        CHECK(row["residual"].get<double>() <= 1e-8);
        CHECK(row["min_eigenfunction"].get<double>() > 0);
    }
}

TEST_CASE("steady profile and below-threshold failure") {
    const auto dir = scratch("steady");
    const auto ok = write_config(dir, "grid: {n: 129}\nmodel: {mu: 1}\n");
    CHECK(cli({"steady", "-c", ok, "-o", (dir / "a").string()}).code == 0);
    const auto csv = io::read_file(dir / "a" / "theta.csv");
    CHECK(csv.rfind("x,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 130);

    io::write_file(dir / "below.yaml", "grid: {n: 129}\nmodel: {mu: 0.5}\n");
    const auto r = cli({"steady", "-c", (dir / "below.yaml").string(), "-o", (dir / "b").string()});
    CHECK(r.code == 1);
    CHECK(manifest(dir / "b")["status"] == "solver-error");
}

TEST_CASE("configuration errors exit with 2") {
    const auto dir = scratch("bad");
    io::write_file(dir / "bad.yaml", "model: {mu: abc}\n");
    const auto r = cli({"mu1", "-c", (dir / "bad.yaml").string(), "-o", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("model.mu") != std::string::npos);
    CHECK(cli({"mu1", "-c", (dir / "missing.yaml").string()}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("check-v with linear-saturating V") {
    const auto dir = scratch("checkv");
    const auto cfg = write_config(dir, "model: {sensitivity: {family: linear-saturating}}\nexperiment: {dimension: 1}\n");
    CHECK(cli({"check-v", "-c", cfg, "-o", (dir / "out").string()}).code == 0);
    const auto j = json::parse(io::read_file(dir / "out" / "check_v.json"));
    CHECK(j["H1"]["pass"] == false);
    CHECK(j["positivity"]["pass"] == true);
    CHECK(j["envelope"]["alpha"] == 1.0);
    CHECK(j["envelope"]["pass"] == true);
}

TEST_CASE("simulate is deterministic and reproducible from its manifest") {
    const auto dir = scratch("simulate");
    const auto cfg = write_config(dir, "grid: {n: 65}\nmodel: {mu: 1.2}\ntime: {t_end: 2, output_every: 20}\ninitial: {bump: 0.5}\n");
    CHECK(cli({"simulate", "-c", cfg, "-o", (dir / "a").string()}).code == 0);
    CHECK(cli({"simulate", "-c", cfg, "-o", (dir / "b").string()}).code == 0);
    const auto m = manifest(dir / "a");
    CHECK(m["partial"] == false);
    REQUIRE(m["outputs"].size() == 3);
    for (const auto& f : m["outputs"]) {
        const std::string name = f.get<std::string>();
        CHECK(io::read_file(dir / "a" / name) == io::read_file(dir / "b" / name));
    }
    const auto diag = io::read_file(dir / "a" / "diagnostics.csv");
    CHECK(diag.rfind("t,mass_u,mass_v,linf_u,linf_v,l2_v_minus_theta,boundary_flux_v\n", 0) == 0);
    CHECK(io::read_file(dir / "a" / "trajectory.csv").rfind("t,x,u,v\n", 0) == 0);

    // the echoed config carries output_dir = a; override it
    CHECK(cli({"simulate", "--from-manifest", (dir / "a" / "manifest.json").string(), "-o", (dir / "c").string()})
              .code == 0);
    for (const auto& f : m["outputs"]) {
        const std::string name = f.get<std::string>();
        CHECK(io::read_file(dir / "a" / name) == io::read_file(dir / "c" / name));
    }
}

TEST_CASE("formats filter the outputs") {
    const auto dir = scratch("formats");
    const auto cfg = write_config(dir, "grid: {n: 65}\ntime: {t_end: 0.5}\nio: {formats: [json]}\n");
    CHECK(cli({"simulate", "-c", cfg, "-o", (dir / "out").string()}).code == 0);
    CHECK_FALSE(fs::exists(dir / "out" / "trajectory.csv"));
    CHECK(fs::exists(dir / "out" / "summary.json"));
}

TEST_CASE("classify and sweep outputs") {
    const auto dir = scratch("classify");
    const auto cfg = write_config(dir,
                                  "grid: {n: 65}\nmodel: {lambda: 1, mu: 0.5}\ntime: {t_end: 40}\n"
                                  "experiment: {lambda_list: [1], mu_list: [0.3, 0.5]}\n");
    const auto r = cli({"classify", "-c", cfg, "-o", (dir / "c").string()});
    CHECK(r.code == 0);
    const auto j = json::parse(io::read_file(dir / "c" / "report.json"));
    CHECK(j["verdict"] == "converged-to-(lambda,0)");
    CHECK(j["u_rate"].get<double>() > 0);

    CHECK(cli({"sweep", "-c", cfg, "-o", (dir / "s").string()}).code == 0);
    const auto csv = io::read_file(dir / "s" / "sweep.csv");
    CHECK(csv.rfind("lambda,mu,mu1,alpha_mu,verdict,final_dist_u,final_dist_v,v_rate,u_rate,mass_residual,"
                    "min_u_late,min_v_late",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(fs::exists(dir / "s" / "cells" / "cell_0.json"));
    CHECK(fs::exists(dir / "s" / "cells" / "cell_1.json"));
}

TEST_CASE("csv quoting") {
    CHECK(io::csv_cell("plain") == "plain");
    CHECK(io::csv_cell("a,b") == "\"a,b\"");
    CHECK(io::csv_cell("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(1e-300) == "1e-300");
}

}

TEST_SUITE("regime-examples") {

TEST_CASE("classify with lambda = 0, mu = 0.5") {
    const auto dir = scratch("regimeA");
    const auto cfg = write_config(dir, "model: {lambda: 0, mu: 0.5}\n");
    CHECK(cli({"classify", "-c", cfg, "-o", (dir / "out").string()}).code == 0);
    const auto j = json::parse(io::read_file(dir / "out" / "report.json"));
    MESSAGE("final |u|inf = " << j["distances"]["lambda_u_linf"] << ", |v|inf = " << j["distances"]["lambda_v_linf"]);
    CHECK(j["verdict"] == "converged-to-(lambda,0)");
}

}
