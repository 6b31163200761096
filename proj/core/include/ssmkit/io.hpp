#pragma once

// File formats: JSON configs (mechanism, joint transmission/friction,
// project), two-column trace CSVs, number formatting.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssmkit/dynamics.hpp"
#include "ssmkit/kinematics.hpp"

namespace ssmkit {

inline constexpr int kDefaultPrecision = 9;

/// Shortest-form "%.{precision}g" rendering; deterministic across runs.
std::string format_number(double value, int precision = kDefaultPrecision);

// --- CSV helpers -----------------------------------------------------------

/// Splits on commas and trims surrounding blanks from each field.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Parses a decimal number; throws Error(Parse) with `context` on failure.
double parse_number(std::string_view text, std::string_view context);

/// Two-column CSV `time_s,value` with one header line.
struct TraceColumns {
  std::vector<double> time;
  std::vector<double> value;
};

TraceColumns read_trace_csv(std::istream& is);
TraceColumns read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(std::ostream& os, const std::vector<double>& time,
                     const std::vector<double>& value, int precision = kDefaultPrecision);

// --- Configs ---------------------------------------------------------------

/// Keys: alpha_deg, beta_deg, r0 (optional, 9 numbers row-major).
MechanismGeometry parse_mechanism_config(std::string_view json_text);
MechanismGeometry load_mechanism_config(const std::filesystem::path& path);

/// Transmission + friction config. Keys: kind ("worm_gear" | "lead_screw"),
/// ratio, lead_angle_deg, reflected_inertia, mu_s, mu_c, b_c, b_v. Friction
/// keys are optional and default to 0.
struct JointConfig {
  TransmissionSpec spec;
  FrictionParams params;
  /// mu_c as written in the file, when present.
  std::optional<double> mu_c_prior;
};

JointConfig parse_joint_config(std::string_view json_text);
JointConfig load_joint_config(const std::filesystem::path& path);
std::string joint_config_json(const TransmissionSpec& spec, const FrictionParams& params,
                              int precision = kDefaultPrecision);

/// Project file: {"mechanism": path, "joints": {"1": path, ...},
/// "output_dir": path, "precision": n}. Relative paths resolve against the
/// project file's directory.
struct ProjectConfig {
  std::optional<std::filesystem::path> mechanism;
  std::map<int, std::filesystem::path> joints;
  std::optional<std::filesystem::path> output_dir;
  int precision = kDefaultPrecision;
};

ProjectConfig load_project_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace ssmkit
