#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "angio/dynamics.hpp"
#include "angio/grid.hpp"
#include "angio/harness.hpp"
#include "angio/sensitivity.hpp"

namespace angio::io {

using nlohmann::ordered_json;

/// Shortest round-trip decimal form; identical doubles give identical text.
std::string format_double(double x);

/// RFC-4180 quoting for a single CSV cell.
std::string csv_cell(const std::string& s);

void write_field_csv(std::ostream& os, const FieldD& f);
ordered_json grid_json(const Grid& g);

/// "t,x,u,v", one row per node per snapshot.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// One row per snapshot; l2_v_minus_theta is left empty without theta.
void write_diagnostics_csv(std::ostream& os, const Trajectory& traj, const std::optional<FieldD>& theta);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

ordered_json to_json(const ModelParams& p);
ordered_json to_json(const StepControl& c);
ordered_json to_json(const SensitivitySpec& v);
ordered_json to_json(const PositivityReport& r);
ordered_json to_json(const H1Report& r);
ordered_json to_json(const EnvelopeReport& r);
ordered_json to_json(const DecayFit& f);
ordered_json to_json(const MassAudit& a);
ordered_json to_json(const RegimeReport& r);

/// Writes text to path, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace angio::io
