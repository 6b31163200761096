#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ssmkit/error.hpp"
#include "ssmkit/identification.hpp"
#include "ssmkit/io.hpp"
#include "test_support.hpp"

namespace ssmkit {
namespace {

using test::kDeg;

SegmentOptions segment_options(double tol) {
  SegmentOptions o;
  o.velocity_tolerance = tol;
  return o;
}

// Map built directly from the model at the given joint velocities.
TorqueVelocityMap model_map(const TransmissionSpec& spec, const FrictionParams& p, double load,
                            const std::vector<double>& velocities) {
  TorqueVelocityMap map;
  for (double v : velocities) {
    MapPoint pt{v, motor_torque(spec, p, load, v, 0.0), 0.0, 100};
    (v > 0 ? map.positive : map.negative).push_back(pt);
  }
  return map;
}

void expect_relative(double got, double want, double tol, const char* what) {
  EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << what << ": got " << got << " want " << want;
}

TEST(Telemetry, ParseAndValidate) {
  std::istringstream is(
      "time_s,joint_id,velocity,torque\n0,1,0.1,0.01\n0.005,1,0.1,0.01\n0,4,0.001,0.002\n"
      "0.005,4,0.001,0.002\n0.010,1,0.1,0.01\n");
  const TelemetryLog log = parse_telemetry_csv(is);
  EXPECT_EQ(log.records.size(), 5u);
  EXPECT_EQ(log.joints(), (std::vector<int>{1, 4}));
  EXPECT_EQ(log.joint(1).time.size(), 3u);
  EXPECT_NO_THROW(log.validate());
}

TEST(Telemetry, Rejections) {
  std::istringstream empty("");
  EXPECT_THROW(parse_telemetry_csv(empty), Error);
  std::istringstream header_only("time_s,joint_id,velocity,torque\n");
  EXPECT_THROW(parse_telemetry_csv(header_only), Error);
  std::istringstream bad_header("t,j,v,tau\n0,1,0,0\n");
  EXPECT_THROW(parse_telemetry_csv(bad_header), Error);
  std::istringstream bad_joint("time_s,joint_id,velocity,torque\n0,7,0,0\n");
  EXPECT_THROW(parse_telemetry_csv(bad_joint), Error);

  TelemetryLog slow;
  for (int i = 0; i < 10; ++i) slow.records.push_back({i * 0.01, 1, 0.0, 0.0});
  EXPECT_THROW(slow.validate(), Error);
  TelemetryLog backwards;
  backwards.records = {{0.01, 2, 0, 0}, {0.0, 2, 0, 0}};
  EXPECT_THROW(backwards.validate(), Error);
}

TEST(Telemetry, CsvRoundTrip) {
  TelemetryLog log;
  log.records = {{0.0, 2, 0.1234567891, -0.5}, {0.005, 2, 0.2, 1e-5}};
  std::ostringstream os;
  write_telemetry_csv(os, log);
  std::istringstream is(os.str());
  const TelemetryLog back = parse_telemetry_csv(is);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[0].velocity, 0.123456789);
  EXPECT_EQ(back.records[1].torque, 1e-5);
}

TEST(Segments, ExactPlateaus) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  const std::vector<double> levels{10 * kDeg, 20 * kDeg, 40 * kDeg};
  const JointSeries s = synthesize_constant_velocity_series(spec, p, 0.0, levels);
  const TorqueVelocityMap map = extract_steady_segments(s, segment_options(2 * kDeg));
  ASSERT_EQ(map.positive.size(), 3u);
  EXPECT_TRUE(map.negative.empty());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(map.positive[i].velocity, levels[i], 1e-14);
    EXPECT_NEAR(map.positive[i].torque_mean, motor_torque(spec, p, 0.0, levels[i], 0.0), 1e-15);
    EXPECT_GE(map.positive[i].count, 10u);
  }
  EXPECT_EQ(map.breakaway.size(), 3u);
}

TEST(Segments, ShortPlateauExcluded) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  SynthesisOptions opt;
  opt.plateau_s = 0.6;  // 0.35 s left after the discard window
  const JointSeries s = synthesize_constant_velocity_series(spec, p, 0.0, {10 * kDeg}, opt);
  try {
    extract_steady_segments(s, segment_options(2 * kDeg));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
  SegmentOptions relaxed = segment_options(2 * kDeg);
  relaxed.min_duration_s = 0.3;
  EXPECT_EQ(extract_steady_segments(s, relaxed).size(), 1u);
}

TEST(Segments, NoisyPlateauMeansWithinThreeSigma) {
  const FrictionParams p = test::table_params(2);
  const TransmissionSpec spec = test::example_transmission(2);
  const std::vector<double> levels{10 * kDeg, 20 * kDeg, 40 * kDeg};
  int inside = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SynthesisOptions opt;
    opt.torque_noise = 0.02;
    opt.seed = seed;
    const JointSeries s = synthesize_constant_velocity_series(spec, p, 0.0, levels, opt);
    const TorqueVelocityMap map = extract_steady_segments(s, segment_options(2 * kDeg));
    ASSERT_EQ(map.positive.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
      const double truth = motor_torque(spec, p, 0.0, levels[i], 0.0);
      const double sigma = 0.02 * truth;
      const auto& pt = map.positive[i];
      inside += std::abs(pt.torque_mean - truth) <= 3.0 * sigma / std::sqrt(pt.count);
      ++total;
    }
  }
  // 3-sigma bound: expect essentially all points inside.
  EXPECT_GE(inside, total - 1);
}

TEST(Segments, RepeatedLevelsMerge) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  const JointSeries s = synthesize_constant_velocity_series(
      spec, p, 0.0, {10 * kDeg, -10 * kDeg, 10 * kDeg});
  const TorqueVelocityMap map = extract_steady_segments(s, segment_options(2 * kDeg));
  ASSERT_EQ(map.positive.size(), 1u);
  ASSERT_EQ(map.negative.size(), 1u);
  EXPECT_GT(map.positive[0].count, 600u);
}

TEST(Fit, NoiselessRecoveryFromModelMap) {
  const std::vector<double> worm_v{-40 * kDeg, -20 * kDeg, -10 * kDeg, 10 * kDeg, 20 * kDeg, 40 * kDeg};
  const std::vector<double> screw_v{-0.02, -0.01, -0.005, 0.005, 0.01, 0.02};
  for (int j : {1, 2, 4}) {
    const FrictionParams p = test::table_params(j);
    const TransmissionSpec spec = test::example_transmission(j);
    const double load = j == 4 ? 5.0 : 0.4;
    const FitReport r = fit_friction(model_map(spec, p, load, j == 4 ? screw_v : worm_v), spec, load);
    EXPECT_TRUE(r.mu_c_identified);
    expect_relative(r.params.mu_c, p.mu_c, 1e-6, "mu_c");
    expect_relative(r.params.b_c, p.b_c, 1e-6, "b_c");
    expect_relative(r.params.b_v, p.b_v, 1e-6, "b_v");
    EXPECT_TRUE(r.mu_s_defaulted);
    EXPECT_EQ(r.params.mu_s, r.params.mu_c);
    EXPECT_LT(r.residual, 1e-9);
  }
}

TEST(Fit, TelemetryPipelineRecoversStaticFriction) {
  for (int j : {1, 2, 4}) {
    const FrictionParams p = test::table_params(j);
    const TransmissionSpec spec = test::example_transmission(j);
    const double u = j == 4 ? 1e-3 : kDeg;
    const double load = j == 4 ? 5.0 : 0.4;
    SynthesisOptions opt;
    if (j == 4) opt.acceleration = 0.1;
    const JointSeries s = synthesize_constant_velocity_series(
        spec, p, load, {10 * u, 20 * u, 40 * u, -10 * u, -20 * u, -40 * u}, opt);
    const TorqueVelocityMap map = extract_steady_segments(s, segment_options(2 * u));
    EXPECT_EQ(map.size(), 6u);
    const FitReport r = fit_friction(map, spec, load);
    expect_relative(r.params.mu_c, p.mu_c, 1e-6, "mu_c");
    expect_relative(r.params.b_c, p.b_c, 1e-6, "b_c");
    expect_relative(r.params.b_v, p.b_v, 1e-6, "b_v");
    EXPECT_FALSE(r.mu_s_defaulted);
    expect_relative(r.params.mu_s, p.mu_s, 1e-6, "mu_s");
  }
}

TEST(Fit, RankDeficient) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  try {
    fit_friction(model_map(spec, p, 0.0, {10 * kDeg, 20 * kDeg}), spec, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(Fit, OneDirectionFlagged) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  FitOptions opt;
  opt.prior_mu_c = 0.13;
  const FitReport r =
      fit_friction(model_map(spec, p, 0.0, {10 * kDeg, 20 * kDeg, 40 * kDeg}), spec, 0.0, opt);
  EXPECT_TRUE(r.one_direction);
  EXPECT_FALSE(r.mu_c_identified);
  EXPECT_EQ(r.params.mu_c, 0.13);
  expect_relative(r.params.b_c, p.b_c, 1e-9, "b_c");
  expect_relative(r.params.b_v, p.b_v, 1e-9, "b_v");
  EXPECT_TRUE(std::isnan(r.residual_negative));
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Fit, NegativeParametersClamped) {
  const TransmissionSpec spec = test::example_transmission(1);
  TorqueVelocityMap map;
  // Torque falling with speed: negative viscous slope.
  for (double v : {0.1, 0.2, 0.3}) map.positive.push_back({v, 0.01 - 0.01 * v, 0.0, 50});
  for (double v : {-0.1, -0.2, -0.3}) map.negative.push_back({v, -0.01 - 0.01 * v, 0.0, 50});
  const FitReport r = fit_friction(map, spec, 0.0);
  EXPECT_EQ(r.params.b_v, 0.0);
  EXPECT_NO_THROW(r.params.validate());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Fit, Idempotent) {
  const FrictionParams p = test::table_params(2);
  const TransmissionSpec spec = test::example_transmission(2);
  const std::vector<double> v{-60 * kDeg, -25 * kDeg, -5 * kDeg, 5 * kDeg, 25 * kDeg, 60 * kDeg};
  // Perturb the map so the first fit is not the generator.
  TorqueVelocityMap map = model_map(spec, p, 0.5, v);
  map.positive[1].torque_mean *= 1.03;
  map.negative[0].torque_mean *= 0.98;
  const FitReport first = fit_friction(map, spec, 0.5);
  const FitReport second = fit_friction(model_map(spec, first.params, 0.5, v), spec, 0.5);
  expect_relative(second.params.mu_c, first.params.mu_c, 1e-9, "mu_c");
  expect_relative(second.params.b_c, first.params.b_c, 1e-9, "b_c");
  expect_relative(second.params.b_v, first.params.b_v, 1e-9, "b_v");
}

TEST(Fit, ScaleConsistency) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  const double load = 0.4;
  const std::vector<double> v{-40 * kDeg, -20 * kDeg, -10 * kDeg, 10 * kDeg, 20 * kDeg, 40 * kDeg};
  const TorqueVelocityMap base = model_map(spec, p, load, v);
  const FitReport r0 = fit_friction(base, spec, load);
  for (double k : {1.3, 2.0}) {
    TorqueVelocityMap scaled = base;
    for (auto* side : {&scaled.positive, &scaled.negative}) {
      for (auto& pt : *side) pt.torque_mean *= k;
    }
    const FitReport rk = fit_friction(scaled, spec, load);
    expect_relative(rk.params.b_c, k * r0.params.b_c, 1e-9, "b_c");
    expect_relative(rk.params.b_v, k * r0.params.b_v, 1e-9, "b_v");
    for (double w : v) {
      expect_relative(motor_torque(spec, rk.params, load, w, 0.0),
                      k * motor_torque(spec, r0.params, load, w, 0.0), 1e-9, "torque");
    }
  }
}

TEST(Fit, WeightedByStandardError) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  const double load = 1.6;
  std::vector<double> v;
  for (double d : {1.0, 2.0, 3.0, 160.0, 180.0, 200.0}) {
    v.push_back(d * kDeg);
    v.push_back(-d * kDeg);
  }
  TorqueVelocityMap map = model_map(spec, p, load, v);
  for (auto* side : {&map.positive, &map.negative}) {
    for (auto& pt : *side) {
      pt.torque_std = 0.05 * std::abs(pt.torque_mean);
      pt.count = 1;
    }
  }
  // An exact map stays exact under any weighting.
  const FitReport r = fit_friction(map, spec, load);
  expect_relative(r.params.mu_c, p.mu_c, 1e-9, "mu_c");
  expect_relative(r.params.b_c, p.b_c, 1e-9, "b_c");
  EXPECT_TRUE(std::isfinite(r.half_width_b_c));
}

TEST(EvaluateModel, SameModelScoresZeroAndNoiseScoresItsLevel) {
  const FrictionParams p = test::table_params(1);
  const TransmissionSpec spec = test::example_transmission(1);
  FitReport report;
  report.params = p;
  JointTrajectory traj;
  for (int k = 0; k < 2000; ++k) {
    traj.time.push_back(k * 0.005);
    traj.velocity.push_back(40 * kDeg * std::sin(k * 0.005 * 2.0));
  }
  const TorqueTrace clean = inverse_dynamics(spec, p, {}, traj);
  EXPECT_EQ(evaluate_model(report, spec, traj, clean), 0.0);

  test::Random rng(61);
  TorqueTrace noisy = clean;
  double lo = 1e9, hi = -1e9, ss = 0.0;
  for (double& tau : noisy.torque) {
    const double before = tau;
    tau *= 1.0 + 0.05 * rng.normal();
    ss += (tau - before) * (tau - before);
    lo = std::min(lo, tau);
    hi = std::max(hi, tau);
  }
  const double expected = std::sqrt(ss / noisy.torque.size()) / (hi - lo);
  EXPECT_NEAR(evaluate_model(report, spec, traj, noisy), expected, 1e-12);
  // Analytic order of magnitude: 5% of the RMS torque over a range of about 2x peak.
  EXPECT_LT(expected, 0.05);
}

TEST(FitReportJson, FeedsBackAsConfig) {
  const FrictionParams p = test::table_params(4);
  const TransmissionSpec spec = test::example_transmission(4);
  FitReport r;
  r.params = p;
  const std::string text = fit_report_json(spec, r);
  EXPECT_NE(text.find("\"fit\""), std::string::npos);
  const JointConfig back = parse_joint_config(text);
  EXPECT_EQ(back.spec.kind, TransmissionKind::LeadScrew);
  expect_relative(back.spec.ratio, spec.ratio, 1e-8, "ratio");
  expect_relative(back.params.b_v, p.b_v, 1e-8, "b_v");
  expect_relative(back.params.mu_s, p.mu_s, 1e-8, "mu_s");
}

}  // namespace
}  // namespace ssmkit
