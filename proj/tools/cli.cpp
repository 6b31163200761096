#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ssmkit/dynamics.hpp"
#include "ssmkit/error.hpp"
#include "ssmkit/identification.hpp"
#include "ssmkit/io.hpp"
#include "ssmkit/kinematics.hpp"
#include "ssmkit/workspace.hpp"

namespace ssmkit::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kDeg = std::numbers::pi / 180.0;

// Design geometry used when no mechanism file is given.
constexpr double kDefaultAlphaDeg = 30.0;
constexpr double kDefaultBetaDeg = 110.0;

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  for (auto f : split_csv_line(text)) out.push_back(parse_number(f, what));
  if (expected != 0 && out.size() != expected) {
    throw Error(ErrorCode::Parse, fmt::format("{} needs {} comma-separated numbers", what, expected));
  }
  return out;
}

// Joint display units at the command line: deg for revolute joints driven by
// worm gears, mm for the lead-screw translation.
double display_to_si(const TransmissionSpec& spec, double v) {
  return spec.kind == TransmissionKind::WormGear ? v * kDeg : v * 1e-3;
}

struct Common {
  std::optional<std::string> config;
  std::optional<std::string> mechanism;
  std::optional<int> precision;
};

class Session {
 public:
  Session(const Common& common, std::ostream& out) : common_(common), out_(out) {
    if (common_.config) project_ = load_project_config(*common_.config);
  }

  int precision() const {
    if (common_.precision) return *common_.precision;
    return project_ ? project_->precision : kDefaultPrecision;
  }

  std::string num(double v) const { return format_number(v, precision()); }

  MechanismGeometry geometry() const {
    if (common_.mechanism) return load_mechanism_config(*common_.mechanism);
    if (project_ && project_->mechanism) return load_mechanism_config(*project_->mechanism);
    return build_geometry(kDefaultAlphaDeg * kDeg, kDefaultBetaDeg * kDeg);
  }

  // Joint config from --transmission, else from the project file.
  JointConfig joint(const std::optional<std::string>& transmission, std::optional<int> id) const {
    if (transmission) return load_joint_config(*transmission);
    if (!project_) {
      throw Error(ErrorCode::Parse, "need --transmission or --config with --joint");
    }
    if (!id) throw Error(ErrorCode::Parse, "--joint is required with --config");
    const auto it = project_->joints.find(*id);
    if (it == project_->joints.end()) {
      throw Error(ErrorCode::Parse, fmt::format("joint {} is not configured", *id));
    }
    return load_joint_config(it->second);
  }

  std::vector<int> configured_joints() const {
    std::vector<int> ids;
    if (project_) {
      for (const auto& [id, path] : project_->joints) ids.push_back(id);
    }
    return ids;
  }

  // Relative output paths go under the project output_dir, else
  // $SSMKIT_OUTPUT_DIR, else the working directory.
  fs::path output_path(const std::string& path) const {
    fs::path p = path;
    if (p.is_absolute()) return p;
    fs::path root;
    if (project_ && project_->output_dir) {
      root = *project_->output_dir;
    } else if (const char* env = std::getenv("SSMKIT_OUTPUT_DIR"); env && *env) {
      root = env;
    }
    if (root.empty()) return p;
    fs::create_directories(root);
    return root / p;
  }

  std::ofstream open_output(const std::string& path) const {
    const fs::path p = output_path(path);
    std::ofstream os(p);
    if (!os) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", p.string()));
    return os;
  }

  std::ostream& out() const { return out_; }

 private:
  Common common_;
  std::ostream& out_;
  std::optional<ProjectConfig> project_;
};

// --- workspace ---------------------------------------------------------------

struct WorkspaceArgs {
  double alpha_deg = 0.0;
  double beta_deg = 0.0;
  std::optional<std::size_t> samples;
  std::optional<std::string> csv;
};

void cmd_workspace(const Session& s, const WorkspaceArgs& a) {
  const double alpha = a.alpha_deg * kDeg;
  const double beta = a.beta_deg * kDeg;
  const TiltExtremes t = tilt_extremes(alpha, beta);
  auto& out = s.out();
  const auto deg = [&](double rad) { return s.num(rad / kDeg); };

  out << "alpha_deg: " << s.num(a.alpha_deg) << '\n';
  out << "beta_deg: " << s.num(a.beta_deg) << '\n';
  out << "phi_candidates_deg: +(a+b)=" << deg(t.phi_values[0]) << " -(a+b)=" << deg(t.phi_values[1])
      << " +(a-b)=" << deg(t.phi_values[2]) << " -(a-b)=" << deg(t.phi_values[3])
      << "  (folded to polar angles)\n";
  out << "tilt_band_deg: " << deg(t.tilt_min) << " to " << deg(t.tilt_max)
      << "  (polar angle from omega1)\n";
  out << "tilt_span_deg: " << deg(t.span) << '\n';
  out << "signed_range_deg: " << deg(t.signed_min) << " to " << deg(t.signed_max)
      << "  (plane section through omega1, tool side negative)\n";

  if (a.samples || a.csv) {
    const std::size_t n = a.samples.value_or(2048);
    const auto geom = build_geometry(alpha, beta);
    const auto samples = sample_workspace(geom, n, n);
    const auto band = sampled_band(samples);
    out << "sampled_band_deg: " << deg(band[0]) << " to " << deg(band[1]) << "  (" << n << "x" << n
        << " grid)\n";
    if (a.csv) {
      auto os = s.open_output(*a.csv);
      write_workspace_csv(os, samples);
      out << "wrote " << samples.size() << " samples to " << s.output_path(*a.csv).string() << '\n';
    }
  }
}

// --- fk / ik -------------------------------------------------------------------

void print_pose(const Session& s, const Pose& g) {
  auto& out = s.out();
  out << "position_m: " << s.num(g.position.x()) << ' ' << s.num(g.position.y()) << ' '
      << s.num(g.position.z()) << '\n';
  out << "position_norm_m: " << s.num(g.position.norm()) << '\n';
  out << "rotation:\n";
  for (int r = 0; r < 3; ++r) {
    out << "  " << s.num(g.rotation.matrix()(r, 0)) << ' ' << s.num(g.rotation.matrix()(r, 1)) << ' '
        << s.num(g.rotation.matrix()(r, 2)) << '\n';
  }
}

struct FkArgs {
  std::string theta;
  std::optional<std::string> out;
};

void cmd_fk(const Session& s, const FkArgs& a) {
  const auto v = parse_list(a.theta, 4, "--theta");
  const JointState q{v[0] * kDeg, v[1] * kDeg, v[2] * kDeg, v[3]};
  const Pose g = forward_kinematics(s.geometry(), q);
  print_pose(s, g);
  if (a.out) {
    nlohmann::json j;
    const auto rnd = [&](double x) { return std::stod(s.num(x)); };
    j["position"] = {rnd(g.position.x()), rnd(g.position.y()), rnd(g.position.z())};
    std::vector<double> r;
    for (int i = 0; i < 9; ++i) r.push_back(rnd(g.rotation.matrix()(i / 3, i % 3)));
    j["rotation"] = r;
    auto os = s.open_output(*a.out);
    os << j.dump(2) << '\n';
  }
}

struct IkArgs {
  std::optional<std::string> pose;
  std::optional<std::string> position;
  std::optional<std::string> rotation;
};

// Rotations read back from 9-digit text are only orthonormal to ~1e-9.
constexpr double kParsedRotationTolerance = 1e-6;

Pose read_target(const IkArgs& a) {
  Vec3 p;
  Mat3 m;
  if (a.pose) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(*a.pose));
      const auto pos = j.at("position").get<std::vector<double>>();
      const auto rot = j.at("rotation").get<std::vector<double>>();
      if (pos.size() != 3 || rot.size() != 9) throw Error(ErrorCode::Parse, "pose file sizes");
      p = Vec3(pos[0], pos[1], pos[2]);
      for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rot[i];
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, fmt::format("pose file: {}", e.what()));
    }
  } else {
    if (!a.position || !a.rotation) {
      throw Error(ErrorCode::Parse, "ik needs --pose FILE or both --position and --rotation");
    }
    const auto pos = parse_list(*a.position, 3, "--position");
    const auto rot = parse_list(*a.rotation, 9, "--rotation");
    p = Vec3(pos[0], pos[1], pos[2]);
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rot[i];
  }
  return Pose{Rot3::from_matrix(m, kParsedRotationTolerance), p};
}

void cmd_ik(const Session& s, const IkArgs& a) {
  const Pose target = read_target(a);
  const IkSolutionSet set = inverse_kinematics(s.geometry(), target);
  auto& out = s.out();
  out << "branch,theta1_deg,theta2_deg,theta3_deg,theta4_m,position_error_m,rotation_error,flags\n";
  for (std::size_t i = 0; i < set.branches.size(); ++i) {
    const auto& b = set.branches[i];
    std::string flags;
    if (set.preferred && *set.preferred == i) flags += "preferred";
    if (b.singular) flags += flags.empty() ? "singular" : ";singular";
    out << i << ',' << s.num(b.joints.theta1 / kDeg) << ',' << s.num(b.joints.theta2 / kDeg) << ','
        << s.num(b.joints.theta3 / kDeg) << ',' << s.num(b.joints.theta4) << ','
        << s.num(b.position_error) << ',' << s.num(b.rotation_error) << ',' << flags << '\n';
  }
  if (set.singular()) {
    out << "note: tool axis on the roll axis; theta1 fixed to 0 and absorbed by theta3\n";
  }
}

// --- identify -------------------------------------------------------------------

struct IdentifyArgs {
  std::string telemetry;
  std::optional<std::string> transmission;
  int joint = 1;
  double test_load = 0.0;
  double velocity_tol = 2.0;
  double min_duration = 0.5;
  double discard = 0.25;
  std::optional<std::string> out;
};

void cmd_identify(const Session& s, const IdentifyArgs& a) {
  const JointConfig cfg = s.joint(a.transmission, a.joint);
  const TelemetryLog log = read_telemetry_csv(a.telemetry);
  log.validate();

  SegmentOptions seg;
  seg.velocity_tolerance = display_to_si(cfg.spec, a.velocity_tol);
  seg.min_duration_s = a.min_duration;
  seg.discard_s = a.discard;
  const TorqueVelocityMap map = extract_steady_segments(log, a.joint, seg);

  FitOptions opts;
  opts.prior_mu_c = cfg.mu_c_prior;
  const FitReport report = fit_friction(map, cfg.spec, a.test_load, opts);

  auto& out = s.out();
  out << "joint " << a.joint << " torque-velocity map\n";
  out << "velocity,torque_mean_nm,torque_std_nm,samples\n";
  for (const auto* side : {&map.negative, &map.positive}) {
    for (const auto& p : *side) {
      out << s.num(p.velocity) << ',' << s.num(p.torque_mean) << ',' << s.num(p.torque_std) << ','
          << p.count << '\n';
    }
  }
  out << "breakaway_samples: " << map.breakaway.size() << '\n';
  out << "mu_s: " << s.num(report.params.mu_s) << (report.mu_s_defaulted ? " (default = mu_c)" : "")
      << '\n';
  out << "mu_c: " << s.num(report.params.mu_c) << (report.mu_c_identified ? "" : " (not identified)")
      << '\n';
  out << "b_c: " << s.num(report.params.b_c) << '\n';
  out << "b_v: " << s.num(report.params.b_v) << '\n';
  out << "residual_nrmsd: " << s.num(report.residual) << '\n';
  if (report.one_direction) out << "one-direction fit\n";
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';

  if (a.out) {
    auto os = s.open_output(*a.out);
    os << fit_report_json(cfg.spec, report, s.precision()) << '\n';
    out << "wrote " << s.output_path(*a.out).string() << '\n';
  }
}

// --- simulate ---------------------------------------------------------------------

struct SimulateArgs {
  std::optional<std::string> transmission;
  std::optional<int> joint;
  std::string trajectory;
  double load = 0.0;
  std::optional<std::string> measured;
  std::optional<std::string> out;
};

void cmd_simulate(const Session& s, const SimulateArgs& a) {
  const JointConfig cfg = s.joint(a.transmission, a.joint);
  const TraceColumns cols = read_trace_csv(a.trajectory);
  JointTrajectory traj;
  traj.time = cols.time;
  traj.velocity = cols.value;
  const double load = a.load;
  const TorqueTrace sim = inverse_dynamics(cfg.spec, cfg.params, [load](double) { return load; }, traj);

  std::optional<double> score;
  if (a.measured) {
    const TraceColumns m = read_trace_csv(*a.measured);
    score = nrmsd(sim, TorqueTrace{m.time, m.value});
  }
  if (a.out) {
    auto os = s.open_output(*a.out);
    write_trace_csv(os, sim.time, sim.torque, s.precision());
  } else {
    write_trace_csv(s.out(), sim.time, sim.torque, s.precision());
  }
  if (score) {
    s.out() << "joint " << a.joint.value_or(0) << " nrmsd " << s.num(*score) << '\n';
  }
}

// --- payload ----------------------------------------------------------------------

struct PayloadArgs {
  std::optional<std::string> transmission;
  std::optional<int> joint;
  double load = 0.0;
  double vmax = 0.0;
  std::size_t points = 50;
  std::optional<std::string> out;
};

void cmd_payload(const Session& s, const PayloadArgs& a) {
  if (!(a.vmax > 0.0) || a.points == 0) {
    throw Error(ErrorCode::Precondition, "--vmax must be positive and --points at least 1");
  }
  std::vector<std::pair<int, JointConfig>> joints;
  if (a.transmission || a.joint) {
    joints.emplace_back(a.joint.value_or(0), s.joint(a.transmission, a.joint));
  } else {
    for (int id : s.configured_joints()) joints.emplace_back(id, s.joint(std::nullopt, id));
    if (joints.empty()) throw Error(ErrorCode::Parse, "no joints configured; pass --transmission");
  }

  std::ostringstream csv;
  csv << "joint,joint_velocity,motor_velocity_rad_s,motor_torque_nm\n";
  for (const auto& [id, cfg] : joints) {
    const double vmax = display_to_si(cfg.spec, a.vmax);
    std::vector<double> grid(a.points);
    for (std::size_t k = 0; k < a.points; ++k) {
      grid[k] = vmax * static_cast<double>(k + 1) / static_cast<double>(a.points);
    }
    for (const auto& p : payload_curve(cfg.spec, cfg.params, a.load, grid)) {
      csv << id << ',' << s.num(p.joint_velocity) << ',' << s.num(p.motor_velocity) << ','
          << s.num(p.motor_torque) << '\n';
    }
  }
  if (a.out) {
    auto os = s.open_output(*a.out);
    os << csv.str();
  } else {
    s.out() << csv.str();
  }
}

// --- synth-telemetry ----------------------------------------------------------------

struct SynthArgs {
  std::optional<std::string> transmission;
  int joint = 1;
  std::string velocities;
  double load = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_synth(const Session& s, const SynthArgs& a) {
  const JointConfig cfg = s.joint(a.transmission, a.joint);
  std::vector<double> vel;
  for (double v : parse_list(a.velocities, 0, "--velocities")) vel.push_back(display_to_si(cfg.spec, v));
  SynthesisOptions opts;
  opts.torque_noise = a.noise;
  opts.seed = a.seed;
  if (cfg.spec.kind == TransmissionKind::LeadScrew) opts.acceleration = 0.1;  // 100 mm/s^2
  const JointSeries series =
      synthesize_constant_velocity_series(cfg.spec, cfg.params, a.load, vel, opts);
  TelemetryLog log;
  for (std::size_t i = 0; i < series.time.size(); ++i) {
    log.records.push_back({series.time[i], a.joint, series.velocity[i], series.torque[i]});
  }
  auto os = s.open_output(a.out);
  write_telemetry_csv(os, log);
  s.out() << "wrote " << log.records.size() << " samples to " << s.output_path(a.out).string() << '\n';
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unreachable:
    case ErrorCode::InsufficientData:
    case ErrorCode::RankDeficient:
      return kExitInfeasible;
    default:
      return kExitInputError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinematics and transmission-aware dynamics of a 4-DoF spherical mechanism", "ssmkit"};
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config, "Project config (JSON)");
  app.add_option("--mechanism", common.mechanism, "Mechanism config (JSON)");
  app.add_option("--precision", common.precision, "Significant digits of emitted numbers")
      ->check(CLI::Range(1, 17));

  WorkspaceArgs ws;
  auto* c_ws = app.add_subcommand("workspace", "Tilt range from the axis angles");
  c_ws->add_option("alpha_deg", ws.alpha_deg, "Angle between axes 1 and 2 (deg)")->required();
  c_ws->add_option("beta_deg", ws.beta_deg, "Angle between axes 2 and 3 (deg)")->required();
  c_ws->add_option("--samples", ws.samples, "Grid size n (n x n samples) for the sampled band");
  c_ws->add_option("--csv", ws.csv, "Write sampled points as CSV");

  FkArgs fk;
  auto* c_fk = app.add_subcommand("fk", "Forward kinematics");
  c_fk->add_option("--theta", fk.theta, "theta1,theta2,theta3 (deg),theta4 (m)")->required();
  c_fk->add_option("--out", fk.out, "Write the pose as JSON");

  IkArgs ik;
  auto* c_ik = app.add_subcommand("ik", "Inverse kinematics, all branches");
  c_ik->add_option("--pose", ik.pose, "Pose JSON as written by fk --out");
  c_ik->add_option("--position", ik.position, "x,y,z (m)");
  c_ik->add_option("--rotation", ik.rotation, "9 numbers, row-major");

  IdentifyArgs id;
  auto* c_id = app.add_subcommand("identify", "Fit friction parameters from telemetry");
  c_id->add_option("telemetry", id.telemetry, "Telemetry CSV")->required();
  c_id->add_option("--transmission", id.transmission, "Joint transmission config (JSON)");
  c_id->add_option("--joint", id.joint, "Joint id in the telemetry")->check(CLI::Range(1, 4));
  c_id->add_option("--test-load", id.test_load, "Constant joint-side test load (N*m or N)");
  c_id->add_option("--velocity-tol", id.velocity_tol, "Plateau tolerance (deg/s or mm/s)");
  c_id->add_option("--min-duration", id.min_duration, "Minimum plateau length (s)");
  c_id->add_option("--discard", id.discard, "Transient discarded at plateau start (s)");
  c_id->add_option("--out", id.out, "Write the fit report (JSON)");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Inverse dynamics of a velocity trajectory");
  c_sim->add_option("--transmission", sim.transmission, "Joint transmission config (JSON)");
  c_sim->add_option("--joint", sim.joint, "Joint id from the project config")->check(CLI::Range(1, 4));
  c_sim->add_option("--trajectory", sim.trajectory, "Velocity CSV time_s,value")->required();
  c_sim->add_option("--load", sim.load, "Constant joint-side load (N*m or N)");
  c_sim->add_option("--measured", sim.measured, "Measured torque CSV for NRMSD");
  c_sim->add_option("--out", sim.out, "Write simulated torque CSV (default stdout)");

  PayloadArgs pay;
  auto* c_pay = app.add_subcommand("payload", "Steady-state payload curves");
  c_pay->add_option("--transmission", pay.transmission, "Joint transmission config (JSON)");
  c_pay->add_option("--joint", pay.joint, "Joint id from the project config")->check(CLI::Range(1, 4));
  c_pay->add_option("--load", pay.load, "Joint-side load (N*m or N)");
  c_pay->add_option("--vmax", pay.vmax, "Top of the velocity grid (deg/s or mm/s)")->required();
  c_pay->add_option("--points", pay.points, "Grid points")->check(CLI::PositiveNumber);
  c_pay->add_option("--out", pay.out, "Write curve CSV (default stdout)");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth-telemetry", "Generate constant-velocity telemetry");
  c_syn->add_option("--transmission", syn.transmission, "Joint transmission config (JSON)");
  c_syn->add_option("--joint", syn.joint, "Joint id")->check(CLI::Range(1, 4));
  c_syn->add_option("--velocities", syn.velocities, "Plateaus (deg/s or mm/s), comma-separated")->required();
  c_syn->add_option("--load", syn.load, "Constant joint-side load (N*m or N)");
  c_syn->add_option("--noise", syn.noise, "Multiplicative torque noise (std)");
  c_syn->add_option("--seed", syn.seed, "Noise seed");
  c_syn->add_option("--out", syn.out, "Telemetry CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    const Session session(common, out);
    if (c_ws->parsed()) cmd_workspace(session, ws);
    if (c_fk->parsed()) cmd_fk(session, fk);
    if (c_ik->parsed()) cmd_ik(session, ik);
    if (c_id->parsed()) cmd_identify(session, id);
    if (c_sim->parsed()) cmd_simulate(session, sim);
    if (c_pay->parsed()) cmd_payload(session, pay);
    if (c_syn->parsed()) cmd_synth(session, syn);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace ssmkit::cli
