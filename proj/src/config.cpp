#include "angio/config.hpp"

#include <cmath>
#include <set>

#include <yaml-cpp/yaml.h>

#include "angio/errors.hpp"
#include "angio/io.hpp"

namespace angio {

double RunConfig::envelope_alpha() const {
    if (experiment.envelope_alpha) return *experiment.envelope_alpha;
    return model.V.family() == SensitivityFamily::saturating_power ? model.V.exponent() : 1.0;
}

ClassifyOptions RunConfig::classify_options() const {
    ClassifyOptions o;
    o.threshold = experiment.threshold;
    o.dimension = experiment.dimension;
    o.h1_delta = experiment.delta;
    return o;
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] void fail(const std::string& key, const YAML::Node& n, const std::string& msg) {
    const int line = line_of(n);
    std::string what = "config key '" + key + "': " + msg;
    if (line > 0) what += " (line " + std::to_string(line) + ")";
    throw ConfigError(what, key, line);
}

// Map section accessor that remembers which keys were read.
class Section {
public:
    Section(const YAML::Node& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) fail(prefix_, node_, "expected a mapping");
    }

    YAML::Node get(const std::string& key) {
        seen_.insert(key);
        if (!node_ || node_.IsNull()) return YAML::Node();
        const YAML::Node& view = node_;
        return view[key];
    }
    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    template <class T>
    void read(const std::string& key, T& out) {
        const YAML::Node n = get(key);
        if (!n || n.IsNull()) return;
        out = convert<T>(n, path(key));
    }

    double read_finite(const std::string& key, double fallback) {
        double v = fallback;
        read(key, v);
        if (!std::isfinite(v)) fail(path(key), get(key), "must be finite");
        return v;
    }

    void reject_unknown() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!seen_.count(k)) fail(path(k), kv.first, "unknown key");
        }
    }

    template <class T>
    static T convert(const YAML::Node& n, const std::string& key) {
        if (!n.IsScalar() && !std::is_same_v<T, std::vector<double>>) fail(key, n, "expected a scalar");
        try {
            if constexpr (std::is_same_v<T, double>) {
                const std::string s = n.Scalar();
                if (s == "inf" || s == "nan" || s == "-inf") fail(key, n, "must be finite");
                return n.as<double>();
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (!n.IsSequence()) fail(key, n, "expected a list of numbers");
                std::vector<double> out;
                for (const auto& e : n) {
                    const double x = e.as<double>();
                    if (!std::isfinite(x)) fail(key, e, "entries must be finite");
                    out.push_back(x);
                }
                return out;
            } else {
                return n.as<T>();
            }
        } catch (const YAML::BadConversion&) {
            fail(key, n, "cannot read '" + (n.IsScalar() ? n.Scalar() : std::string("<non-scalar>")) + "' as " +
                             type_name<T>());
        }
    }

private:
    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, double>) return "a number";
        else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, unsigned>) return "an integer";
        else if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else return "a list of numbers";
    }

    YAML::Node node_;
    std::string prefix_;
    std::set<std::string> seen_;
};

SensitivitySpec parse_sensitivity(Section& model) {
    const YAML::Node node = model.get("sensitivity");
    Section s(node, "model.sensitivity");
    std::string family = "saturating-power";
    double exponent = 2, vmax = 1;
    std::vector<double> ts, tv;
    s.read("family", family);
    exponent = s.read_finite("exponent", exponent);
    vmax = s.read_finite("vmax", vmax);
    s.read("s", ts);
    s.read("v", tv);
    s.reject_unknown();
    try {
        switch (sensitivity_family_from_string(family)) {
            case SensitivityFamily::saturating_power: return SensitivitySpec::saturating_power(exponent);
            case SensitivityFamily::linear_saturating: return SensitivitySpec::linear_saturating();
            case SensitivityFamily::truncated_linear: return SensitivitySpec::truncated_linear(vmax);
            case SensitivityFamily::tabulated: return SensitivitySpec::tabulated(ts, tv);
        }
    } catch (const DomainConfigError& e) {
        const std::string key = family == "saturating-power" ? "exponent" : family == "truncated-linear" ? "vmax"
                               : family == "tabulated"      ? "s"
                                                            : "family";
        fail(s.path(key), s.get(key).IsDefined() ? s.get(key) : node, e.what());
    }
    fail("model.sensitivity.family", node, "unknown family");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("config parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg, {},
                          e.mark.line + 1);
    }
    Section top(root, "");
    RunConfig cfg;

    {
        Section g(top.get("grid"), "grid");
        const double L = g.read_finite("L", 1.0);
        int n = 513;
        g.read("n", n);
        g.reject_unknown();
        if (!(L > 0)) fail("grid.L", g.get("L"), "must be positive");
        if (n < 3) fail("grid.n", g.get("n"), "grid needs n >= 3, got " + std::to_string(n));
        cfg.grid = Grid(L, n);
    }
    {
        Section m(top.get("model"), "model");
        cfg.model.lambda = m.read_finite("lambda", 0.0);
        cfg.model.mu = m.read_finite("mu", 0.5);
        cfg.model.c = m.read_finite("c", 1.0);
        cfg.model.V = parse_sensitivity(m);
        m.reject_unknown();
        if (!(cfg.model.c > 0)) fail("model.c", m.get("c"), "must be positive");
    }
    {
        Section t(top.get("time"), "time");
        const YAML::Node dt = t.get("dt");
        if (dt && !dt.IsNull()) {
            if (dt.IsScalar() && dt.Scalar() == "auto") {
                cfg.time.auto_dt = true;
            } else {
                cfg.time.auto_dt = false;
                cfg.time.dt = Section::convert<double>(dt, "time.dt");
                if (!(cfg.time.dt > 0)) fail("time.dt", dt, "must be positive or 'auto'");
            }
        }
        const double default_end = cfg.model.mu > std::tanh(cfg.grid.length()) ? 80.0 : 40.0;
        cfg.time.dt_max = t.read_finite("dt_max", cfg.time.dt_max);
        if (!(cfg.time.dt_max > 0)) fail("time.dt_max", t.get("dt_max"), "must be positive");
        cfg.time.t_end = t.read_finite("t_end", default_end);
        t.read("output_every", cfg.time.output_every);
        cfg.time.dt_safety = t.read_finite("dt_safety", cfg.time.dt_safety);
        t.reject_unknown();
        if (!(cfg.time.t_end > 0)) fail("time.t_end", t.get("t_end"), "must be positive");
        if (cfg.time.output_every < 1) fail("time.output_every", t.get("output_every"), "must be >= 1");
        if (!(cfg.time.dt_safety > 0 && cfg.time.dt_safety <= 1))
            fail("time.dt_safety", t.get("dt_safety"), "must lie in (0, 1]");
    }
    {
        Section i(top.get("initial"), "initial");
        cfg.initial.u0 = i.read_finite("u0", cfg.initial.u0);
        cfg.initial.v0 = i.read_finite("v0", cfg.initial.v0);
        cfg.initial.bump = i.read_finite("bump", cfg.initial.bump);
        i.reject_unknown();
        if (cfg.initial.u0 < 0) fail("initial.u0", i.get("u0"), "must be nonnegative");
        if (cfg.initial.v0 < 0) fail("initial.v0", i.get("v0"), "must be nonnegative");
        if (cfg.initial.bump < 0) fail("initial.bump", i.get("bump"), "must be nonnegative");
    }
    {
        Section o(top.get("io"), "io");
        o.read("output_dir", cfg.io.output_dir);
        const YAML::Node f = o.get("formats");
        if (f && !f.IsNull()) {
            if (!f.IsSequence()) fail("io.formats", f, "expected a list drawn from [csv, json]");
            cfg.io.csv = cfg.io.json = false;
            for (const auto& e : f) {
                const std::string s = Section::convert<std::string>(e, "io.formats");
                if (s == "csv") cfg.io.csv = true;
                else if (s == "json") cfg.io.json = true;
                else fail("io.formats", e, "unknown format '" + s + "'");
            }
        }
        o.reject_unknown();
        if (cfg.io.output_dir.empty()) fail("io.output_dir", o.get("output_dir"), "must not be empty");
    }
    {
        Section e(top.get("experiment"), "experiment");
        e.read("mu_list", cfg.experiment.mu_list);
        e.read("lambda_list", cfg.experiment.lambda_list);
        e.read("dimension", cfg.experiment.dimension);
        cfg.experiment.delta = e.read_finite("delta", cfg.experiment.delta);
        if (const YAML::Node a = e.get("envelope_alpha"); a && !a.IsNull())
            cfg.experiment.envelope_alpha = Section::convert<double>(a, "experiment.envelope_alpha");
        cfg.experiment.s_max = e.read_finite("s_max", cfg.experiment.s_max);
        cfg.experiment.threshold = e.read_finite("threshold", cfg.experiment.threshold);
        e.read("threads", cfg.experiment.threads);
        e.reject_unknown();
        if (cfg.experiment.mu_list.empty()) fail("experiment.mu_list", e.get("mu_list"), "must not be empty");
        if (cfg.experiment.lambda_list.empty())
            fail("experiment.lambda_list", e.get("lambda_list"), "must not be empty");
        if (cfg.experiment.dimension < 1) fail("experiment.dimension", e.get("dimension"), "must be >= 1");
        if (!(cfg.experiment.delta > 0 && cfg.experiment.delta <= 1))
            fail("experiment.delta", e.get("delta"), "must lie in (0, 1]");
        if (cfg.experiment.envelope_alpha && !(*cfg.experiment.envelope_alpha >= 1))
            fail("experiment.envelope_alpha", e.get("envelope_alpha"), "must be >= 1");
        if (!(cfg.experiment.s_max > 0)) fail("experiment.s_max", e.get("s_max"), "must be positive");
        if (!(cfg.experiment.threshold > 0)) fail("experiment.threshold", e.get("threshold"), "must be positive");
    }
    top.reject_unknown();
    return cfg;
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    using nlohmann::ordered_json;
    ordered_json sens = io::to_json(cfg.model.V);
    if (sens.contains("table")) {
        sens["s"] = sens["table"]["s"];
        sens["v"] = sens["table"]["v"];
        sens.erase("table");
    }
    ordered_json formats = ordered_json::array();
    if (cfg.io.csv) formats.push_back("csv");
    if (cfg.io.json) formats.push_back("json");
    ordered_json exp{{"mu_list", cfg.experiment.mu_list},
                     {"lambda_list", cfg.experiment.lambda_list},
                     {"dimension", cfg.experiment.dimension},
                     {"delta", cfg.experiment.delta}};
    if (cfg.experiment.envelope_alpha) exp["envelope_alpha"] = *cfg.experiment.envelope_alpha;
    exp["s_max"] = cfg.experiment.s_max;
    exp["threshold"] = cfg.experiment.threshold;
    exp["threads"] = cfg.experiment.threads;
    return {{"grid", io::grid_json(cfg.grid)},
            {"model",
             {{"lambda", cfg.model.lambda}, {"mu", cfg.model.mu}, {"c", cfg.model.c}, {"sensitivity", sens}}},
            {"time", io::to_json(cfg.time)},
            {"initial", {{"u0", cfg.initial.u0}, {"v0", cfg.initial.v0}, {"bump", cfg.initial.bump}}},
            {"io", {{"output_dir", cfg.io.output_dir}, {"formats", formats}}},
            {"experiment", exp}};
}

}  // namespace angio
