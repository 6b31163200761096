#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "ssmkit/dynamics.hpp"
#include "ssmkit/identification.hpp"

namespace {

using namespace ssmkit;
constexpr double kDeg = std::numbers::pi / 180.0;

const TransmissionSpec kWorm{TransmissionKind::WormGear, 120.0, 3.0 * kDeg, 2e-6};
const FrictionParams kJoint1{0.15, 0.13, 3.82e-3, 7.18e-5};

JointSeries sweep() {
  SynthesisOptions opt;
  opt.torque_noise = 0.02;
  opt.seed = 3;
  return synthesize_constant_velocity_series(
      kWorm, kJoint1, 0.4, {10 * kDeg, 20 * kDeg, 40 * kDeg, -10 * kDeg, -20 * kDeg, -40 * kDeg}, opt);
}

SegmentOptions segments() {
  SegmentOptions o;
  o.velocity_tolerance = 2 * kDeg;
  return o;
}

void BM_ExtractSegments(benchmark::State& state) {
  const JointSeries s = sweep();
  for (auto _ : state) benchmark::DoNotOptimize(extract_steady_segments(s, segments()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.time.size()));
}
BENCHMARK(BM_ExtractSegments);

void BM_FitFriction(benchmark::State& state) {
  const TorqueVelocityMap map = extract_steady_segments(sweep(), segments());
  for (auto _ : state) benchmark::DoNotOptimize(fit_friction(map, kWorm, 0.4));
}
BENCHMARK(BM_FitFriction);

void BM_MotorTorque(benchmark::State& state) {
  double w = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(motor_torque(kWorm, kJoint1, 0.4, w, 1.0));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_MotorTorque);

}  // namespace
