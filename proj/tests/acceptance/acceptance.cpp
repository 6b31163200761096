// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check states its measured figure next to the threshold.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ssmkit/dynamics.hpp"
#include "ssmkit/identification.hpp"
#include "ssmkit/kinematics.hpp"
#include "ssmkit/subproblems.hpp"
#include "ssmkit/workspace.hpp"
#include "test_support.hpp"

namespace {

using namespace ssmkit;
using test::kDeg;
using test::kPi;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --- 1 ----------------------------------------------------------------------

Outcome workspace_reproduction() {
  const auto t0 = Clock::now();
  const TiltExtremes t = tilt_extremes(30 * kDeg, 110 * kDeg);
  const double once = seconds_since(t0);

  const double err = std::max({std::abs(t.tilt_min - 80 * kDeg), std::abs(t.tilt_max - 140 * kDeg),
                               std::abs(t.span - 60 * kDeg), std::abs(t.signed_min + 140 * kDeg),
                               std::abs(t.signed_max + 80 * kDeg)});
  return {err < 1e-12 && once < 1e-3,
          fmt::format("band {:.12g}..{:.12g} deg, span {:.12g} deg, signed {:.12g}..{:.12g} deg, "
                      "max error {:.2e} rad, {:.1f} us",
                      t.tilt_min / kDeg, t.tilt_max / kDeg, t.span / kDeg, t.signed_min / kDeg,
                      t.signed_max / kDeg, err, once * 1e6)};
}

// --- 2 ----------------------------------------------------------------------

Outcome workspace_equivalence() {
  test::Random rng(2002);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(5, 175) * kDeg;
    const double b = rng.uniform(5, 175) * kDeg;
    const TiltExtremes t = tilt_extremes(a, b);
    const auto band = sampled_band(sample_workspace(build_geometry(a, b), 2, 4096));
    worst = std::max({worst, std::abs(band[0] - t.tilt_min), std::abs(band[1] - t.tilt_max)});
  }
  const double elapsed = seconds_since(t0);
  return {worst < 0.05 * kDeg && elapsed < 5.0,
          fmt::format("200 geometries, worst edge gap {:.4f} deg (limit 0.05), {:.2f} s", worst / kDeg,
                      elapsed)};
}

// --- 3 ----------------------------------------------------------------------

Outcome ik_correctness() {
  const MechanismGeometry g = build_geometry(30 * kDeg, 110 * kDeg);
  test::Random rng(3003);
  int recovered = 0;
  double worst_branch = 0.0, worst_recovery = 0.0;
  int failures = 0;
  const int n = 100000;
  const auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) {
    const JointState th = test::random_joint_state(rng).normalized();
    const Pose target = forward_kinematics(g, th);
    IkSolutionSet set;
    try {
      set = inverse_kinematics(g, target);
    } catch (const std::exception&) {
      ++failures;
      continue;
    }
    double best = 1e300;
    for (const auto& b : set.branches) {
      const PoseError e = pose_error(forward_kinematics(g, b.joints), target);
      worst_branch = std::max({worst_branch, e.position, e.rotation});
      const bool same = test::angle_diff(b.joints.theta1, th.theta1) < 1e-6 &&
                        test::angle_diff(b.joints.theta2, th.theta2) < 1e-6 &&
                        test::angle_diff(b.joints.theta3, th.theta3) < 1e-6 &&
                        std::abs(b.joints.theta4 - th.theta4) < 1e-9;
      if (same) best = std::min(best, std::max(e.position, e.rotation));
    }
    if (best < 1e-9) {
      ++recovered;
      worst_recovery = std::max(worst_recovery, best);
    }
  }
  const double elapsed = seconds_since(t0);
  return {recovered == n && worst_branch < 1e-9 && elapsed < 30.0,
          fmt::format("{}/{} recovered, {} unreachable, worst branch residual {:.2e}, {:.2f} s", recovered,
                      n, failures, worst_branch, elapsed)};
}

// --- 4 ----------------------------------------------------------------------

// Crossings of |q - p - v t| = delta found by scanning the line.
int scan_crossings(const Vec3& v, const Vec3& p, const Vec3& q, double delta, int samples) {
  const double centre = (q - p).dot(v);
  const double reach = delta + 1.0;
  int crossings = 0;
  double prev = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = centre - reach + 2.0 * reach * i / samples;
    const double f = (q - p - v * t).norm() - delta;
    if (i > 0 && (f > 0.0) != (prev > 0.0)) ++crossings;
    prev = f;
  }
  return crossings;
}

Outcome subproblem3prime_residuals() {
  test::Random rng(4004);
  const int n = 10000;
  const int scan_samples = 20000;
  double worst = 0.0;
  int count_mismatch = 0, scan_checked = 0, scan_mismatch = 0;
  int by_mult[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const Vec3 v = rng.unit_vector();
    const Vec3 p = rng.vector(1.0);
    const Vec3 q = rng.vector(1.0);
    const Vec3 u = q - p;
    const double miss = (u - v * u.dot(v)).norm();  // closest approach of the line to q
    // A tenth of the cases are constructed tangent.
    const double delta = i % 10 == 0 ? miss : rng.uniform(0.01, 1.5);
    if (!(delta > 0.0)) continue;
    const auto s = subproblem3prime(v, p, q, delta);
    ++by_mult[s.multiplicity()];
    for (const auto& [t] : s) worst = std::max(worst, std::abs((q - p - v * t).norm() - delta));

    const double disc = u.dot(v) * u.dot(v) + delta * delta - u.squaredNorm();
    const std::size_t expected = disc < -kTangencyBand ? 0 : (disc <= kTangencyBand ? 1 : 2);
    if (s.multiplicity() != expected) ++count_mismatch;

    // The scan separates two roots only if they are a few grid steps apart,
    // and sees no crossing for a miss only if the gap exceeds its resolution.
    const double step = 2.0 * (delta + 1.0) / scan_samples;
    const double root_gap = disc > 0 ? 2.0 * std::sqrt(disc) : 0.0;
    if ((disc > 0 && root_gap > 4 * step) || (disc < 0 && miss - delta > 1e-6)) {
      ++scan_checked;
      if (scan_crossings(v, p, q, delta, scan_samples) != static_cast<int>(expected)) ++scan_mismatch;
    }
  }
  return {worst < 1e-10 && count_mismatch == 0 && scan_mismatch == 0,
          fmt::format("{} trials (0/1/2 roots: {}/{}/{}), worst residual {:.2e}, discriminant "
                      "mismatches {}, scan-checked {} with {} mismatches",
                      n, by_mult[0], by_mult[1], by_mult[2], worst, count_mismatch, scan_checked,
                      scan_mismatch)};
}

// --- 5 ----------------------------------------------------------------------

struct MapDesign {
  std::vector<double> speeds;  // positive levels, used in both directions
  double load;
};

MapDesign identification_design(int joint) {
  if (joint == 4) {
    return {{0.3e-3, 0.6e-3, 0.9e-3, 24e-3, 27e-3, 30e-3}, 5.0};
  }
  return {{1 * kDeg, 2 * kDeg, 3 * kDeg, 160 * kDeg, 180 * kDeg, 200 * kDeg}, 1.6};
}

TorqueVelocityMap design_map(const TransmissionSpec& spec, const FrictionParams& p,
                             const MapDesign& d, double noise, test::Random* rng) {
  TorqueVelocityMap map;
  for (double level : d.speeds) {
    for (double v : {-level, level}) {
      const double truth = motor_torque(spec, p, d.load, v, 0.0);
      MapPoint pt;
      pt.velocity = v;
      pt.torque_mean = rng ? truth * (1.0 + noise * rng->normal()) : truth;
      pt.torque_std = noise * std::abs(truth);
      pt.count = 1;
      (v > 0 ? map.positive : map.negative).push_back(pt);
    }
  }
  return map;
}

double worst_relative(const FrictionParams& got, const FrictionParams& want) {
  return std::max({std::abs(got.mu_c / want.mu_c - 1.0), std::abs(got.b_c / want.b_c - 1.0),
                   std::abs(got.b_v / want.b_v - 1.0)});
}

Outcome friction_fit_recovery() {
  bool pass = true;
  std::string detail;
  for (int joint : {1, 2, 4}) {
    const FrictionParams p = test::table_params(joint);
    const TransmissionSpec spec = test::example_transmission(joint);
    const MapDesign d = identification_design(joint);

    const FitReport clean = fit_friction(design_map(spec, p, d, 0.0, nullptr), spec, d.load);
    const double clean_err = worst_relative(clean.params, p);

    test::Random rng(5000 + joint);
    int within = 0;
    const int trials = 500;
    for (int k = 0; k < trials; ++k) {
      try {
        const FitReport r = fit_friction(design_map(spec, p, d, 0.05, &rng), spec, d.load);
        within += worst_relative(r.params, p) <= 0.10;
      } catch (const std::exception&) {
      }
    }
    const double rate = static_cast<double>(within) / trials;
    pass = pass && clean_err < 1e-6 && rate >= 0.95;
    detail += fmt::format("{}joint {}: noiseless {:.1e}, 5% noise {:.1f}% within 10%", detail.empty() ? "" : "; ",
                          joint, clean_err, 100.0 * rate);
  }
  return {pass, detail};
}

// --- 6 ----------------------------------------------------------------------

// Closed-loop style run: accelerate to +speed, hold, reverse to -speed,
// hold, stop. Velocity carries tracking ripple; torque carries sensor noise.
struct Run {
  JointTrajectory trajectory;
  TorqueTrace measured;
};

Run closed_loop_run(const TransmissionSpec& spec, const FrictionParams& p, double load, double speed,
                    double accel, test::Random& rng) {
  const double dt = 0.005;
  std::vector<double> v;
  const auto hold = [&](double level, double seconds) {
    for (int k = 0; k < static_cast<int>(seconds / dt); ++k) v.push_back(level);
  };
  const auto ramp = [&](double from, double to) {
    const int steps = static_cast<int>(std::ceil(std::abs(to - from) / (accel * dt)));
    for (int k = 1; k <= steps; ++k) v.push_back(from + (to - from) * k / steps);
  };
  hold(0.0, 0.3);
  ramp(0.0, speed);
  hold(speed, 1.5);
  ramp(speed, -speed);
  hold(-speed, 1.5);
  ramp(-speed, 0.0);
  hold(0.0, 0.3);
  for (double& x : v) x *= 1.0 + 0.01 * rng.normal();

  Run run;
  run.trajectory.velocity = v;
  for (std::size_t k = 0; k < v.size(); ++k) run.trajectory.time.push_back(k * dt);
  run.measured = inverse_dynamics(spec, p, [load](double) { return load; }, run.trajectory);
  for (double& tau : run.measured.torque) tau *= 1.0 + 0.01 * rng.normal();
  return run;
}

Outcome dynamics_self_consistency() {
  const double tilt[] = {10 * kDeg, 20 * kDeg, 40 * kDeg, 80 * kDeg};
  const double insertion[] = {10e-3, 20e-3, 40e-3, 40e-3};
  bool pass = true;
  double worst = 0.0;
  std::string detail;
  for (int joint : {1, 2, 4}) {
    const FrictionParams p = test::table_params(joint);
    const TransmissionSpec spec = test::example_transmission(joint);
    const bool screw = joint == 4;
    const double u = screw ? 1e-3 : kDeg;
    const double load = screw ? 3.0 : 0.4;

    // Identify from noisy constant-velocity telemetry first.
    SynthesisOptions opt;
    opt.torque_noise = 0.02;
    opt.seed = 600 + joint;
    if (screw) opt.acceleration = 0.1;
    std::vector<double> levels;
    for (double s : {2.0, 5.0, 10.0, 20.0, 40.0, 60.0}) {
      levels.push_back(s * u);
      levels.push_back(-s * u);
    }
    const JointSeries series = synthesize_constant_velocity_series(spec, p, load, levels, opt);
    SegmentOptions seg;
    seg.velocity_tolerance = 1.0 * u;
    const FitReport fit = fit_friction(extract_steady_segments(series, seg), spec, load);

    test::Random rng(6000 + joint);
    for (int k = 0; k < 4; ++k) {
      const double speed = screw ? insertion[k] : tilt[k];
      const Run run = closed_loop_run(spec, p, load, speed, screw ? 0.2 : 200 * kDeg, rng);
      const double score =
          evaluate_model(fit, spec, run.trajectory, run.measured, [load](double) { return load; });
      worst = std::max(worst, score);
      pass = pass && score < 0.02;
    }
    detail += fmt::format("{}joint {} fitted mu_c {:.4f} b_c {:.3e} b_v {:.3e}", detail.empty() ? "" : "; ",
                          joint, fit.params.mu_c, fit.params.b_c, fit.params.b_v);
  }
  return {pass, fmt::format("12 runs, worst NRMSD {:.4f} (limit 0.02); {}", worst, detail)};
}

// --- 7 ----------------------------------------------------------------------

Outcome self_locking() {
  test::Random rng(7007);
  int points = 0, violations = 0;
  for (int i = 0; i < 10; ++i) {
    const double mu_s = 0.05 + 0.05 * i;
    for (int j = 0; j < 10; ++j) {
      // Lead angles up to and including the locking limit atan(mu_s).
      const double lead = std::atan(mu_s) * ((j + 1) / 10.0);
      const FrictionParams p{mu_s, 0.8 * mu_s, 1e-3, 1e-5};
      const TransmissionSpec spec{j % 2 ? TransmissionKind::LeadScrew : TransmissionKind::WormGear,
                                  j % 2 ? 6283.0 : 80.0, lead, 1e-6};
      ++points;
      bool ok = spec.self_locking(p.mu_s) &&
                transmission_efficiency(spec, p, PowerFlow::Overhauling, FrictionRegime::Static) == 0.0;
      for (int k = 0; k < 20; ++k) {
        const double load = rng.uniform(-1e3, 1e3);
        ok = ok && motor_torque(spec, p, load, 0.0, 0.0) == 0.0;
      }
      violations += !ok;
    }
  }
  return {points == 100 && violations == 0,
          fmt::format("{} (lead, mu) points, {} with nonzero holding torque or efficiency", points,
                      violations)};
}

// --- 8 ----------------------------------------------------------------------

Outcome payload_curves() {
  test::Random rng(8008);
  int monotone_fail = 0, intercept_fail = 0, steady_fail = 0;
  double worst_steady = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int joint = std::array{1, 2, 4}[trial % 3];
    FrictionParams p = test::table_params(joint);
    p.b_v *= rng.uniform(0.2, 5.0);
    const TransmissionSpec spec = test::example_transmission(joint);
    const double vmax = joint == 4 ? 0.04 : 65 * kDeg;
    const double load = rng.uniform(-2.0, 2.0);
    std::vector<double> grid;
    for (int k = 1; k <= 100; ++k) grid.push_back(vmax * k / 100.0);

    const auto curve = payload_curve(spec, p, load, grid);
    for (std::size_t k = 1; k < curve.size(); ++k) {
      monotone_fail += curve[k].motor_torque < curve[k - 1].motor_torque;
    }
    for (const auto& pt : payload_curve(spec, p, 0.0, grid)) {
      intercept_fail += pt.motor_torque != p.b_c + p.b_v * pt.motor_velocity;
    }
    JointTrajectory traj;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      // Hold each grid velocity for three samples; the middle one is steady.
      for (int r = 0; r < 3; ++r) {
        traj.time.push_back(static_cast<double>(traj.time.size()) * 0.005);
        traj.velocity.push_back(grid[k]);
      }
    }
    const TorqueTrace tr = inverse_dynamics(spec, p, [load](double) { return load; }, traj);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double d = std::abs(tr.torque[3 * k + 1] - curve[k].motor_torque);
      worst_steady = std::max(worst_steady, d);
      steady_fail += d > 1e-12;
    }
  }
  return {monotone_fail == 0 && intercept_fail == 0 && steady_fail == 0,
          fmt::format("100 curves: {} monotonicity breaks, {} zero-load points off b_c + b_v w, "
                      "steady-state gap {:.1e} N*m",
                      monotone_fail, intercept_fail, worst_steady)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"workspace reproduction", workspace_reproduction},
      {"analytic vs sampled workspace", workspace_equivalence},
      {"inverse kinematics round trip", ik_correctness},
      {"translation-to-distance residuals", subproblem3prime_residuals},
      {"friction fit recovery", friction_fit_recovery},
      {"inverse dynamics self-consistency", dynamics_self_consistency},
      {"self-locking", self_locking},
      {"payload curves", payload_curves},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
