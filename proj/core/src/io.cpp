#include "ssmkit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ssmkit/error.hpp"

namespace ssmkit {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, fmt::format("{}: {}", what, e.what()));
  }
}

double number_field(const json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::Parse, fmt::format("{}: missing key '{}'", what, key));
  }
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw Error(ErrorCode::Parse, fmt::format("{}: key '{}' is not a number", what, key));
  }
  return v.get<double>();
}

// Rounds to `precision` significant digits so the JSON writer (shortest
// round-trip form) emits at most that many.
double rounded(double v, int precision) {
  return std::stod(fmt::format("{:.{}g}", v, precision));
}

}  // namespace

std::string format_number(double value, int precision) {
  if (value == 0.0) return "0";  // no "-0"
  return fmt::format("{:.{}g}", value, precision);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
    fields.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(std::string_view text, std::string_view context) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::Parse, fmt::format("{}: '{}' is not a number", context, text));
  }
  return v;
}

TraceColumns read_trace_csv(std::istream& is) {
  TraceColumns out;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (header) {
      header = false;
      if (fields.size() != 2 || fields[0] != "time_s" || fields[1] != "value") {
        throw Error(ErrorCode::Parse, "trace CSV header must be 'time_s,value'");
      }
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCode::Parse, fmt::format("trace CSV line {}: expected 2 fields", line_no));
    }
    const std::string ctx = fmt::format("trace CSV line {}", line_no);
    out.time.push_back(parse_number(fields[0], ctx));
    out.value.push_back(parse_number(fields[1], ctx));
  }
  if (header) throw Error(ErrorCode::Parse, "trace CSV is empty");
  return out;
}

TraceColumns read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  return read_trace_csv(in);
}

void write_trace_csv(std::ostream& os, const std::vector<double>& time,
                     const std::vector<double>& value, int precision) {
  os << "time_s,value\n";
  for (std::size_t i = 0; i < time.size(); ++i) {
    os << format_number(time[i], precision) << ',' << format_number(value[i], precision) << '\n';
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MechanismGeometry parse_mechanism_config(std::string_view json_text) {
  constexpr std::string_view what = "mechanism config";
  const json j = parse_json(json_text, what);
  const double alpha = number_field(j, "alpha_deg", what) * kDeg;
  const double beta = number_field(j, "beta_deg", what) * kDeg;
  Rot3 r0;
  if (j.contains("r0") && !j.at("r0").is_null()) {
    const json& r = j.at("r0");
    if (!r.is_array() || r.size() != 9) {
      throw Error(ErrorCode::Parse, "mechanism config: r0 must hold 9 numbers (row-major)");
    }
    Mat3 m;
    for (int i = 0; i < 9; ++i) {
      if (!r[i].is_number()) throw Error(ErrorCode::Parse, "mechanism config: r0 entry is not a number");
      m(i / 3, i % 3) = r[i].get<double>();
    }
    r0 = Rot3::from_matrix(m);
  }
  return build_geometry(alpha, beta, r0);
}

MechanismGeometry load_mechanism_config(const std::filesystem::path& path) {
  return parse_mechanism_config(read_text_file(path));
}

JointConfig parse_joint_config(std::string_view json_text) {
  constexpr std::string_view what = "joint config";
  const json j = parse_json(json_text, what);
  JointConfig c;
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw Error(ErrorCode::Parse, "joint config: missing string key 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "worm_gear") {
    c.spec.kind = TransmissionKind::WormGear;
  } else if (kind == "lead_screw") {
    c.spec.kind = TransmissionKind::LeadScrew;
  } else {
    throw Error(ErrorCode::Parse, fmt::format("joint config: unknown kind '{}'", kind));
  }
  c.spec.ratio = number_field(j, "ratio", what);
  c.spec.lead_angle = number_field(j, "lead_angle_deg", what) * kDeg;
  c.spec.reflected_inertia = number_field(j, "reflected_inertia", what);
  const auto optional_number = [&](const char* key) {
    return j.contains(key) ? number_field(j, key, what) : 0.0;
  };
  c.params.mu_s = optional_number("mu_s");
  c.params.mu_c = optional_number("mu_c");
  c.params.b_c = optional_number("b_c");
  c.params.b_v = optional_number("b_v");
  if (j.contains("mu_c")) c.mu_c_prior = c.params.mu_c;
  if (!j.contains("mu_s")) c.params.mu_s = c.params.mu_c;
  c.spec.validate();
  c.params.validate();
  return c;
}

JointConfig load_joint_config(const std::filesystem::path& path) {
  return parse_joint_config(read_text_file(path));
}

std::string joint_config_json(const TransmissionSpec& spec, const FrictionParams& params,
                              int precision) {
  json j = json::object();
  j["kind"] = spec.kind == TransmissionKind::WormGear ? "worm_gear" : "lead_screw";
  j["ratio"] = rounded(spec.ratio, precision);
  j["lead_angle_deg"] = rounded(spec.lead_angle / kDeg, precision);
  j["reflected_inertia"] = rounded(spec.reflected_inertia, precision);
  j["mu_s"] = rounded(params.mu_s, precision);
  j["mu_c"] = rounded(params.mu_c, precision);
  j["b_c"] = rounded(params.b_c, precision);
  j["b_v"] = rounded(params.b_v, precision);
  return j.dump(2);
}

ProjectConfig load_project_config(const std::filesystem::path& path) {
  const json j = parse_json(read_text_file(path), "project config");
  const std::filesystem::path base = path.parent_path();
  const auto resolve = [&](const json& v, std::string_view key) {
    if (!v.is_string()) {
      throw Error(ErrorCode::Parse, fmt::format("project config: '{}' must be a path string", key));
    }
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() ? base / p : p;
  };

  ProjectConfig c;
  if (j.contains("mechanism")) c.mechanism = resolve(j.at("mechanism"), "mechanism");
  if (j.contains("joints")) {
    if (!j.at("joints").is_object()) {
      throw Error(ErrorCode::Parse, "project config: 'joints' must be an object");
    }
    for (const auto& [key, value] : j.at("joints").items()) {
      int id = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
      if (ec != std::errc{} || ptr != key.data() + key.size() || id < 1 || id > 4) {
        throw Error(ErrorCode::Parse, fmt::format("project config: bad joint id '{}'", key));
      }
      if (value.is_null()) continue;  // explicitly absent
      const auto p = resolve(value, key);
      if (!std::filesystem::exists(p)) {
        throw Error(ErrorCode::Io, fmt::format("project config: joint {} file '{}' not found", id, p.string()));
      }
      c.joints[id] = p;
    }
  }
  if (c.mechanism && !std::filesystem::exists(*c.mechanism)) {
    throw Error(ErrorCode::Io, fmt::format("project config: mechanism file '{}' not found", c.mechanism->string()));
  }
  if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir"), "output_dir");
  if (j.contains("precision")) {
    if (!j.at("precision").is_number_integer() || j.at("precision").get<int>() < 1 ||
        j.at("precision").get<int>() > 17) {
      throw Error(ErrorCode::Parse, "project config: precision must be an integer in [1, 17]");
    }
    c.precision = j.at("precision").get<int>();
  }
  return c;
}

}  // namespace ssmkit
