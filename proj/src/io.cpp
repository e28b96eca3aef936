#include "angio/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "angio/errors.hpp"

namespace angio::io {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

void write_field_csv(std::ostream& os, const FieldD& f) {
    os << "x,value\n";
    for (Eigen::Index i = 0; i < f.grid().size(); ++i)
        os << format_double(f.grid().node(i)) << ',' << format_double(f[i]) << '\n';
}

ordered_json grid_json(const Grid& g) { return {{"L", g.length()}, {"n", g.size()}}; }

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,u,v\n";
    for (const auto& s : traj.snapshots) {
        const std::string t = format_double(s.state.t);
        for (Eigen::Index i = 0; i < traj.grid.size(); ++i)
            os << t << ',' << format_double(traj.grid.node(i)) << ',' << format_double(s.state.u[i]) << ','
               << format_double(s.state.v[i]) << '\n';
    }
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& traj, const std::optional<FieldD>& theta) {
    os << "t,mass_u,mass_v,linf_u,linf_v,l2_v_minus_theta,boundary_flux_v\n";
    for (const auto& s : traj.snapshots) {
        const auto& d = s.diag;
        os << format_double(s.state.t) << ',' << format_double(d.mass_u) << ',' << format_double(d.mass_v) << ','
           << format_double(d.linf_u) << ',' << format_double(d.linf_v) << ',';
        if (theta) os << format_double(norm(s.state.v - *theta, NormKind::L2));
        os << ',' << format_double(d.boundary_flux_v) << '\n';
    }
}

namespace {

std::string opt(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

ordered_json opt_json(const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); }

// JSON has no inf/nan; those become strings
ordered_json num(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "lambda,mu,mu1,alpha_mu,verdict,final_dist_u,final_dist_v,v_rate,u_rate,mass_residual,min_u_late,"
          "min_v_late,error\n";
    for (const auto& row : rows) {
        os << format_double(row.lambda) << ',' << format_double(row.mu) << ',';
        if (row.report) {
            const auto& r = *row.report;
            os << format_double(r.mu1) << ',' << format_double(r.alpha_mu) << ',' << csv_cell(to_string(r.verdict))
               << ',' << format_double(r.final_dist_u) << ',' << format_double(r.final_dist_v) << ','
               << opt(r.v_rate) << ',' << opt(r.u_rate) << ','
               << (r.mass_audit ? format_double(r.mass_audit->residual) : std::string()) << ','
               << format_double(r.min_u_late) << ',' << format_double(r.min_v_late) << ",\n";
        } else {
            os << ",,error,,,,,,,," << csv_cell(row.error) << '\n';
        }
    }
}

ordered_json to_json(const SensitivitySpec& v) {
    ordered_json j{{"family", to_string(v.family())}};
    switch (v.family()) {
        case SensitivityFamily::saturating_power: j["exponent"] = v.exponent(); break;
        case SensitivityFamily::truncated_linear: j["vmax"] = v.vmax(); break;
        case SensitivityFamily::tabulated: j["table"] = {{"s", v.table_s()}, {"v", v.table_v()}}; break;
        case SensitivityFamily::linear_saturating: break;
    }
    return j;
}

ordered_json to_json(const ModelParams& p) {
    return {{"lambda", p.lambda}, {"mu", p.mu}, {"c", p.c}, {"sensitivity", to_json(p.V)}};
}

ordered_json to_json(const StepControl& c) {
    return {{"dt", c.auto_dt ? ordered_json("auto") : ordered_json(c.dt)},
            {"dt_max", c.dt_max},
            {"t_end", c.t_end},
            {"output_every", c.output_every},
            {"dt_safety", c.dt_safety}};
}

ordered_json to_json(const PositivityReport& r) {
    return {{"v_at_zero", r.v_at_zero},
            {"min_value", r.min_value},
            {"max_derivative_error", r.max_derivative_error},
            {"v0_zero", r.v0_zero},
            {"positive", r.positive},
            {"derivative_consistent", r.derivative_consistent},
            {"pass", r.pass()}};
}

ordered_json to_json(const H1Report& r) { return {{"k0", num(r.k0)}, {"j", num(r.j)}, {"pass", r.pass}}; }

ordered_json to_json(const EnvelopeReport& r) {
    return {{"c_m", num(r.c_m)}, {"C_M", num(r.C_M)}, {"pass", r.pass}};
}

ordered_json to_json(const DecayFit& f) {
    return {{"quantity", f.quantity},
            {"rate", num(f.rate)},
            {"window", {f.t_start, f.t_end}},
            {"r_squared", num(f.r_squared)},
            {"samples", f.samples},
            {"trustworthy", f.trustworthy()}};
}

ordered_json to_json(const MassAudit& a) {
    return {{"tau", a.tau},
            {"t", a.t},
            {"residual", num(a.residual)},
            {"tolerance", num(a.tolerance)},
            {"scale", num(a.scale)},
            {"pass", a.pass()}};
}

ordered_json to_json(const RegimeReport& r) {
    ordered_json fits = ordered_json::array();
    for (const auto& f : r.fits) fits.push_back(to_json(f));
    ordered_json j{
        {"verdict", to_string(r.verdict)},
        {"params", to_json(r.params)},
        {"grid", grid_json(r.grid)},
        {"time", to_json(r.ctrl)},
        {"mu1", num(r.mu1)},
        {"alpha_mu", num(r.alpha_mu)},
        {"final_dist_u", num(r.final_dist_u)},
        {"final_dist_v", num(r.final_dist_v)},
        {"distances",
         {{"lambda_u_linf", num(r.dist_lambda_u)},
          {"lambda_v_linf", num(r.dist_lambda_v)},
          {"theta_u_linf", opt_json(r.dist_theta_u)},
          {"theta_v_l2", opt_json(r.dist_theta_v)}}},
        {"theta_l2", opt_json(r.theta_l2)},
        {"h1_seminorm_u", num(r.h1_seminorm_u)},
        {"fits", fits},
        {"v_rate", opt_json(r.v_rate)},
        {"u_rate", opt_json(r.u_rate)},
        {"v_rate_ok", r.v_rate_ok ? ordered_json(*r.v_rate_ok) : ordered_json(nullptr)},
        {"mass_audit", r.mass_audit ? to_json(*r.mass_audit) : ordered_json(nullptr)},
        {"positivity_ok", r.positivity_ok},
        {"min_u_all", r.min_u_all},
        {"min_v_all", r.min_v_all},
        {"h_monitor_min_u_late", num(r.min_u_late)},
        {"c1_monitor_min_v_late", num(r.min_v_late)},
        {"hypotheses",
         {{"positivity", to_json(r.v_positivity)},
          {"H1", r.h1 ? to_json(*r.h1) : ordered_json(nullptr)},
          {"envelope", r.envelope ? to_json(*r.envelope) : ordered_json(nullptr)},
          {"envelope_alpha", r.envelope_alpha}}},
        {"notes", r.notes}};
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw Error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace angio::io
