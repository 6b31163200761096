#pragma once

// Friction identification from constant-velocity telemetry: steady
// plateaus are averaged into a torque-velocity map, which is fitted to the
// static-plus-kinetic model of dynamics.hpp.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ssmkit/dynamics.hpp"

namespace ssmkit {

struct TelemetryRecord {
  double time = 0.0;      // s
  int joint_id = 0;       // 1..4
  double velocity = 0.0;  // joint side, rad/s or m/s
  double torque = 0.0;    // motor side, N*m
};

/// Samples of one joint, time-ordered.
struct JointSeries {
  int joint_id = 0;
  std::vector<double> time;
  std::vector<double> velocity;
  std::vector<double> torque;
};

struct TelemetryLog {
  double nominal_rate_hz = 200.0;
  std::vector<TelemetryRecord> records;

  /// Joint ids present, ascending.
  std::vector<int> joints() const;
  JointSeries joint(int id) const;

  /// Per-joint timestamps strictly increasing and the median sample rate
  /// within 10 % of nominal. Throws Error(Precondition).
  void validate() const;
};

/// CSV with header `time_s,joint_id,velocity,torque`.
TelemetryLog parse_telemetry_csv(std::istream& is);
TelemetryLog read_telemetry_csv(const std::filesystem::path& path);
void write_telemetry_csv(std::ostream& os, const TelemetryLog& log);

struct MapPoint {
  double velocity = 0.0;  // joint side
  double torque_mean = 0.0;
  double torque_std = 0.0;
  std::size_t count = 0;
};

/// Torque at the onset of motion after a rest period.
struct BreakawaySample {
  int direction = 0;
  double torque = 0.0;
  double acceleration = 0.0;  // joint side
};

struct TorqueVelocityMap {
  std::vector<MapPoint> positive;  // ascending velocity
  std::vector<MapPoint> negative;  // ascending velocity
  std::vector<BreakawaySample> breakaway;

  std::size_t size() const { return positive.size() + negative.size(); }
};

struct SegmentOptions {
  /// Samples stay in a segment while within this of the running mean.
  double velocity_tolerance = 0.0;
  /// Minimum plateau length after the discard window.
  double min_duration_s = 0.5;
  /// Leading transient trimmed from each plateau.
  double discard_s = 0.25;
  std::size_t min_samples = 10;
  /// Rest before a breakaway must last at least this long.
  double min_rest_s = 0.05;
};

TorqueVelocityMap extract_steady_segments(const JointSeries& series, const SegmentOptions& options);
TorqueVelocityMap extract_steady_segments(const TelemetryLog& log, int joint_id,
                                          const SegmentOptions& options);

struct FitReport {
  FrictionParams params;
  /// NRMSD of the fitted model over all map points.
  double residual = 0.0;
  /// Per direction, normalized by the overall map range; NaN if absent.
  double residual_positive = std::numeric_limits<double>::quiet_NaN();
  double residual_negative = std::numeric_limits<double>::quiet_NaN();
  /// 95 % confidence half-widths; NaN when not estimable.
  double half_width_b_c = std::numeric_limits<double>::quiet_NaN();
  double half_width_b_v = std::numeric_limits<double>::quiet_NaN();
  double half_width_mu_c = std::numeric_limits<double>::quiet_NaN();
  double test_load = 0.0;
  std::size_t points = 0;
  bool one_direction = false;
  bool mu_c_identified = false;
  bool mu_s_defaulted = false;
  std::vector<std::string> warnings;
};

struct FitOptions {
  /// Used for mu_c when it cannot be identified from the map.
  std::optional<double> prior_mu_c;
  int max_refinements = 50;
};

/// Least-squares fit of
///   tau = b_c sgn(w) + b_v w_m + reflected load(test_load, mu_c)
/// over both directions, plus mu_s from breakaway samples. Points are
/// weighted by their standard error (torque_std / sqrt(count)) when all of
/// them report a nonzero spread.
/// Throws Error(RankDeficient) when the map cannot separate the unknowns.
FitReport fit_friction(const TorqueVelocityMap& map, const TransmissionSpec& spec, double test_load,
                       const FitOptions& options = {});

/// Simulates `trajectory` with the fitted parameters and returns the NRMSD
/// against `measured`.
double evaluate_model(const FitReport& report, const TransmissionSpec& spec,
                      const JointTrajectory& trajectory, const TorqueTrace& measured,
                      const LoadFunction& load = {});

/// Machine-readable report: the joint config keys (so it can be fed back as
/// a config) plus a "fit" object.
std::string fit_report_json(const TransmissionSpec& spec, const FitReport& report,
                            int precision = 9);

// --- Synthetic telemetry ---------------------------------------------------

struct SynthesisOptions {
  double rate_hz = 200.0;
  double rest_s = 0.5;
  double plateau_s = 2.0;
  /// Joint-side ramp acceleration between rest and plateau.
  double acceleration = 3.4906585039886591;  // 200 deg/s^2
  /// Standard deviation of multiplicative torque noise.
  double torque_noise = 0.0;
  /// Standard deviation of multiplicative velocity ripple on plateaus.
  double velocity_noise = 0.0;
  std::uint64_t seed = 1;
};

/// Rest / ramp / plateau / ramp sequence through `velocities`, with torque
/// from the model under a constant load.
JointSeries synthesize_constant_velocity_series(const TransmissionSpec& spec,
                                                const FrictionParams& params, double load,
                                                const std::vector<double>& velocities,
                                                const SynthesisOptions& options = {});

}  // namespace ssmkit
