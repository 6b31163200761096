#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ssmkit/kinematics.hpp"
#include "ssmkit/workspace.hpp"

namespace {

using namespace ssmkit;
constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<JointState> random_states(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> slide(0.005, 0.05);
  std::vector<JointState> out(n);
  for (auto& s : out) s = JointState{angle(rng), angle(rng), angle(rng), slide(rng)};
  return out;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const MechanismGeometry geom = build_geometry(30 * kDeg, 110 * kDeg);
  const auto states = random_states(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_kinematics(geom, states[i++ & 1023]));
  }
}
BENCHMARK(BM_ForwardKinematics);

void BM_InverseKinematics(benchmark::State& state) {
  const MechanismGeometry geom = build_geometry(30 * kDeg, 110 * kDeg);
  std::vector<Pose> targets;
  for (const auto& s : random_states(1024)) targets.push_back(forward_kinematics(geom, s));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inverse_kinematics(geom, targets[i++ & 1023]));
  }
}
BENCHMARK(BM_InverseKinematics);

void BM_TiltExtremes(benchmark::State& state) {
  double alpha = 30 * kDeg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tilt_extremes(alpha, 110 * kDeg));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_TiltExtremes);

void BM_SampleWorkspace(benchmark::State& state) {
  const MechanismGeometry geom = build_geometry(30 * kDeg, 110 * kDeg);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_workspace(geom, n, n));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_SampleWorkspace)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
