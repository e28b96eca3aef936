#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "angio/dynamics.hpp"
#include "angio/grid.hpp"
#include "angio/harness.hpp"

namespace angio {

struct InitialData {
    double u0 = 0.5;
    double v0 = 0.5;
    /// Amplitude of the cosine hump added to both fields.
    double bump = 0;
};

struct IoConfig {
    std::string output_dir = "out";
    bool csv = true;
    bool json = true;
};

struct ExperimentConfig {
    std::vector<double> mu_list{0, 0.25, 0.5, 0.75, 1};
    std::vector<double> lambda_list{0};
    int dimension = 1;
    double delta = 0.1;
    /// Envelope exponent for check-v; defaults to the saturating-power exponent, else 1.
    std::optional<double> envelope_alpha;
    double s_max = 10;
    double threshold = 1e-3;
    unsigned threads = 0;
};

struct RunConfig {
    Grid grid{1.0, 513};
    ModelParams model;
    StepControl time{0.01, 40, 100, 0.4, true, 0.01};
    InitialData initial;
    IoConfig io;
    ExperimentConfig experiment;

    double envelope_alpha() const;
    ClassifyOptions classify_options() const;
};

/// Parses a YAML (or JSON) document. Missing keys take their defaults; an
/// omitted t_end is 40 when mu <= tanh(L) and 80 otherwise. Unknown keys,
/// type errors and out-of-range values raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);

/// Every field with its resolved value; parse_config(echo.dump()) gives back
/// an identical config.
nlohmann::ordered_json config_echo(const RunConfig& cfg);

}  // namespace angio
