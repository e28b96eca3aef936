#include "angio/cli.hpp"

#include <chrono>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "angio/config.hpp"
#include "angio/errors.hpp"
#include "angio/harness.hpp"
#include "angio/io.hpp"
#include "angio/spectral.hpp"
#include "angio/steady.hpp"

namespace angio {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Collects the files a command writes, honouring io.formats.
class Outputs {
public:
    Outputs(fs::path dir, const IoConfig& io) : dir_(std::move(dir)), io_(io) {}

    void csv(const std::string& name, const std::string& text) {
        if (io_.csv) write(name, text);
    }
    void json(const std::string& name, const ordered_json& j) {
        if (io_.json) write(name, j.dump(2) + "\n");
    }
    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

    bool partial = false;

private:
    void write(const std::string& name, const std::string& text) {
        io::write_file(dir_ / name, text);
        files_.push_back(name);
    }

    fs::path dir_;
    IoConfig io_;
    std::vector<std::string> files_;
};

template <class F>
std::string to_text(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

ordered_json eigen_json(const EigenResult<double>& r) {
    return {{"eigenvalue", r.eigenvalue},
            {"residual", r.residual},
            {"iterations", r.iterations},
            {"shift", r.shift},
            {"min_eigenfunction", r.eigenfunction.values().minCoeff()}};
}

void cmd_eigen(const RunConfig& cfg, Outputs& out, std::ostream& os) {
    std::string csv = "mu,alpha\n";
    ordered_json rows = ordered_json::array();
    for (double mu : cfg.experiment.mu_list) {
        const auto r = principal_eigen(cfg.grid, FieldD::constant(cfg.grid, 1.0), mu);
        csv += io::format_double(mu) + "," + io::format_double(r.eigenvalue) + "\n";
        ordered_json j = eigen_json(r);
        j["mu"] = mu;
        rows.push_back(std::move(j));
    }
    out.csv("alpha.csv", csv);
    out.json("alpha.json", {{"grid", io::grid_json(cfg.grid)}, {"rows", rows}});
    os << csv;
}

void cmd_mu1(const RunConfig& cfg, Outputs& out, std::ostream& os) {
    const double mu1 = compute_mu1(cfg.grid);
    os << io::format_double(mu1) << "\n";
    out.json("mu1.json", {{"grid", io::grid_json(cfg.grid)}, {"mu1", mu1}});
}

void cmd_steady(const RunConfig& cfg, Outputs& out, std::ostream& os) {
    const double mu1 = compute_mu1(cfg.grid);
    const auto st = semi_trivial_v(cfg.grid, cfg.model.mu, mu1);
    out.csv("theta.csv", to_text([&](std::ostream& s) { io::write_field_csv(s, st.v_part); }));
    out.json("theta.json", {{"mu", cfg.model.mu},
                            {"mu1", mu1},
                            {"kind", to_string(st.kind)},
                            {"residual", st.residual},
                            {"theta_gamma1", st.v_part.at_gamma1()},
                            {"theta_gamma2", st.v_part.at_gamma2()},
                            {"theta_l2", norm(st.v_part, NormKind::L2)}});
    os << "theta_mu: mu = " << io::format_double(cfg.model.mu) << ", max = " << io::format_double(st.v_part.at_gamma2())
       << "\n";
}

Trajectory simulate(const RunConfig& cfg, Outputs& out, std::optional<FieldD>& theta, double& mu1) {
    const auto u0 = initial_profile(cfg.grid, cfg.initial.u0, cfg.initial.bump);
    const auto v0 = initial_profile(cfg.grid, cfg.initial.v0, cfg.initial.bump);
    mu1 = compute_mu1(cfg.grid);
    if (cfg.model.mu > mu1) theta = theta_mu(cfg.grid, cfg.model.mu, mu1);
    try {
        return run(u0, v0, cfg.model, cfg.time);
    } catch (const RunError& e) {
        out.partial = true;
        out.csv("trajectory.csv", to_text([&](std::ostream& s) { io::write_trajectory_csv(s, e.partial()); }));
        out.csv("diagnostics.csv",
                to_text([&](std::ostream& s) { io::write_diagnostics_csv(s, e.partial(), theta); }));
        throw;
    }
}

void cmd_simulate(const RunConfig& cfg, Outputs& out, std::ostream& os) {
    std::optional<FieldD> theta;
    double mu1 = 0;
    const Trajectory traj = simulate(cfg, out, theta, mu1);
    out.csv("trajectory.csv", to_text([&](std::ostream& s) { io::write_trajectory_csv(s, traj); }));
    out.csv("diagnostics.csv", to_text([&](std::ostream& s) { io::write_diagnostics_csv(s, traj, theta); }));
    const auto& d = traj.final_snapshot().diag;
    out.json("summary.json", {{"t_end", traj.final_snapshot().state.t},
                              {"steps", traj.step_sizes.size()},
                              {"max_dt", traj.max_dt},
                              {"min_u_all", traj.min_u_all},
                              {"min_v_all", traj.min_v_all},
                              {"final_linf_u", d.linf_u},
                              {"final_linf_v", d.linf_v},
                              {"final_mass_u", d.mass_u}});
    os << "simulated to t = " << io::format_double(traj.final_snapshot().state.t) << " in " << traj.step_sizes.size()
       << " steps\n";
}

void cmd_classify(const RunConfig& cfg, Outputs& out, std::ostream& os) {
    std::optional<FieldD> theta;
    double mu1 = 0;
    const Trajectory traj = simulate(cfg, out, theta, mu1);
    const RegimeReport r = classify_regime(traj, mu1, theta, cfg.classify_options());
    out.json("report.json", io::to_json(r));
    out.csv("diagnostics.csv", to_text([&](std::ostream& s) { io::write_diagnostics_csv(s, traj, theta); }));
    os << to_string(r.verdict) << "\n";
}

void cmd_sweep(const RunConfig& cfg, Outputs& out, std::ostream& os) {
    SweepBase base;
    base.grid = cfg.grid;
    base.params = cfg.model;
    base.ctrl = cfg.time;
    base.u0 = cfg.initial.u0;
    base.v0 = cfg.initial.v0;
    base.bump = cfg.initial.bump;
    base.classify = cfg.classify_options();
    base.threads = cfg.experiment.threads;
    const auto rows = sweep(cfg.experiment.lambda_list, cfg.experiment.mu_list, base);
    out.csv("sweep.csv", to_text([&](std::ostream& s) { io::write_sweep_csv(s, rows); }));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& row = rows[k];
        ordered_json j = row.report ? io::to_json(*row.report)
                                    : ordered_json{{"lambda", row.lambda}, {"mu", row.mu}, {"error", row.error}};
        out.json("cells/cell_" + std::to_string(k) + ".json", j);
        if (!row.report) out.partial = true;
        os << "lambda = " << io::format_double(row.lambda) << ", mu = " << io::format_double(row.mu) << ": "
           << (row.report ? to_string(row.report->verdict) : "error: " + row.error) << "\n";
    }
}

void cmd_check_v(const RunConfig& cfg, Outputs& out, std::ostream& os) {
    const auto& V = cfg.model.V;
    const auto pos = check_positivity(V);
    ordered_json h1;
    try {
        h1 = io::to_json(check_H1(V, cfg.experiment.dimension, cfg.experiment.delta));
    } catch (const HypothesisViolation& e) {
        h1 = {{"pass", false}, {"error", e.what()}};
    }
    const double alpha = cfg.envelope_alpha();
    ordered_json env = io::to_json(check_growth_envelope(V, alpha, cfg.experiment.s_max));
    env["alpha"] = alpha;
    env["s_max"] = cfg.experiment.s_max;
    const auto fg = f_g_diagnostics(V, cfg.experiment.delta);
    const ordered_json j{{"sensitivity", io::to_json(V)},
                         {"dimension", cfg.experiment.dimension},
                         {"delta", cfg.experiment.delta},
                         {"positivity", io::to_json(pos)},
                         {"H1", h1},
                         {"envelope", env},
                         {"f_g", {{"f", fg.f}, {"g", fg.g}}}};
    out.json("check_v.json", j);
    os << j.dump(2) << "\n";
}

ordered_json versions() {
    return {{"angiolab", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__},
            {"cxx_standard", __cplusplus}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tumor angiogenesis chemotaxis model: spectra, steady states, simulation and regime checks",
                 "angiolab"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_path, output_dir, manifest_path;

    using Command = void (*)(const RunConfig&, Outputs&, std::ostream&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands{
        {"eigen", "alpha(mu) over experiment.mu_list as CSV", cmd_eigen},
        {"mu1", "threshold flux strength mu1", cmd_mu1},
        {"steady", "positive steady profile theta_mu as CSV", cmd_steady},
        {"simulate", "time-dependent run, trajectory and diagnostics CSV", cmd_simulate},
        {"classify", "simulate and classify the long-time regime (JSON report)", cmd_classify},
        {"sweep", "classify every (lambda, mu) in the experiment lists", cmd_sweep},
        {"check-v", "hypothesis report for the sensitivity function", cmd_check_v},
    };
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "YAML or JSON config file");
        sub->add_option("-o,--output", output_dir, "output directory (overrides io.output_dir)");
        sub->add_option("--from-manifest", manifest_path, "re-run with the config echoed in a manifest");
    }
    for (auto* sub : app.get_subcommands({})) {
        sub->get_option("--from-manifest")->excludes(sub->get_option("--config"));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? 0 : 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Command fn = nullptr;
    for (const auto& [n, h, f] : commands)
        if (n == name) fn = f;

    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg;
    try {
        std::string text = "{}";
        if (!manifest_path.empty()) {
            const auto manifest = ordered_json::parse(io::read_file(manifest_path));
            if (!manifest.contains("config")) throw ConfigError("manifest has no config echo", "config");
            text = manifest["config"].dump();
        } else if (!config_path.empty()) {
            text = io::read_file(config_path);
        }
        cfg = parse_config(text);
        if (!output_dir.empty()) cfg.io.output_dir = output_dir;
        std::error_code ec;
        fs::create_directories(cfg.io.output_dir, ec);
        if (ec || !fs::is_directory(cfg.io.output_dir))
            throw ConfigError("output directory '" + cfg.io.output_dir + "' is not writable", "io.output_dir");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: manifest is not valid JSON: " << e.what() << "\n";
        return 2;
    }

    Outputs outputs(cfg.io.output_dir, cfg.io);
    int code = 0;
    std::string status = "ok", message;
    try {
        fn(cfg, outputs, out);
    } catch (const DomainConfigError& e) {
        code = 2;
        status = "config-error";
        message = e.what();
    } catch (const ConfigError& e) {
        code = 2;
        status = "config-error";
        message = e.what();
    } catch (const Error& e) {
        code = 1;
        status = "solver-error";
        message = e.what();
    } catch (const std::exception& e) {
        code = 1;
        status = "error";
        message = e.what();
    }
    if (code != 0) err << name << ": " << message << "\n";

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ordered_json manifest{{"tool", "angiolab"},
                          {"subcommand", name},
                          {"status", status},
                          {"exit_code", code},
                          {"partial", outputs.partial},
                          {"outputs", outputs.files()},
                          {"versions", versions()},
                          {"wall_time_s", wall},
                          {"config", config_echo(cfg)}};
    if (!message.empty()) manifest["error"] = message;
    try {
        io::write_file(outputs.dir() / "manifest.json", manifest.dump(2) + "\n");
    } catch (const Error& e) {
        err << "cannot write manifest: " << e.what() << "\n";
        if (code == 0) code = 1;
    }
    return code;
}

}  // namespace angio
