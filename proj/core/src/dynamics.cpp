#include "ssmkit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ssmkit/error.hpp"

namespace ssmkit {

namespace {

int sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

void FrictionParams::validate() const {
  for (double v : {mu_s, mu_c, b_c, b_v}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::Precondition, "friction parameters must be finite and non-negative");
    }
  }
  if (mu_s < mu_c) {
    throw Error(ErrorCode::Precondition,
                fmt::format("static friction {} below Coulomb friction {}", mu_s, mu_c));
  }
}

void TransmissionSpec::validate() const {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(ErrorCode::Precondition, "transmission ratio must be positive");
  }
  if (!(lead_angle > 0.0 && lead_angle < std::numbers::pi / 2.0)) {
    throw Error(ErrorCode::Precondition, "lead angle must lie in (0, 90) deg");
  }
  if (!(reflected_inertia >= 0.0) || !std::isfinite(reflected_inertia)) {
    throw Error(ErrorCode::Precondition, "reflected inertia must be non-negative");
  }
}

bool TransmissionSpec::self_locking(double mu) const { return lead_angle <= std::atan(mu); }

double transmission_efficiency(const TransmissionSpec& spec, const FrictionParams& params,
                               PowerFlow flow, FrictionRegime regime) {
  const double lambda = spec.lead_angle;
  const double rho = std::atan(regime == FrictionRegime::Kinetic ? params.mu_c : params.mu_s);
  if (lambda + rho >= std::numbers::pi / 2.0) {
    throw Error(ErrorCode::Domain, "lead angle plus friction angle reaches 90 deg");
  }
  if (flow == PowerFlow::Driving) {
    return std::tan(lambda) / std::tan(lambda + rho);
  }
  if (lambda <= rho) return 0.0;
  return std::tan(lambda - rho) / std::tan(lambda);
}

double reflected_load_torque(const TransmissionSpec& spec, const FrictionParams& params,
                             double load, int direction, FrictionRegime regime) {
  if (load == 0.0) return 0.0;
  if (load * direction > 0.0) {
    return load / (spec.ratio * transmission_efficiency(spec, params, PowerFlow::Driving, regime));
  }
  return load * transmission_efficiency(spec, params, PowerFlow::Overhauling, regime) / spec.ratio;
}

double motor_torque(const TransmissionSpec& spec, const FrictionParams& params, double load,
                    double joint_velocity, double joint_acceleration,
                    const DynamicsOptions& options) {
  const double w = spec.ratio * joint_velocity;
  const double dw = spec.ratio * joint_acceleration;
  const double inertial = spec.reflected_inertia * dw;

  if (std::abs(w) >= options.static_band) {
    const int s = sign(w);
    return params.b_c * s + params.b_v * w +
           reflected_load_torque(spec, params, load, s, FrictionRegime::Kinetic) + inertial;
  }

  const int s = sign(dw);
  if (s == 0) {
    // Holding: static friction in the transmission carries what it can.
    return load * transmission_efficiency(spec, params, PowerFlow::Overhauling,
                                          FrictionRegime::Static) /
           spec.ratio;
  }
  // Breaking away from rest.
  return params.b_c * s + reflected_load_torque(spec, params, load, s, FrictionRegime::Static) +
         inertial;
}

void JointTrajectory::validate() const {
  if (time.size() < 2 || velocity.size() != time.size()) {
    throw Error(ErrorCode::Precondition,
                "trajectory needs at least two samples and matching time/velocity lengths");
  }
  if (acceleration && acceleration->size() != time.size()) {
    throw Error(ErrorCode::Precondition, "acceleration length does not match time");
  }
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (!std::isfinite(time[i]) || !std::isfinite(velocity[i]) ||
        (acceleration && !std::isfinite((*acceleration)[i]))) {
      throw Error(ErrorCode::Precondition, fmt::format("non-finite trajectory sample {}", i));
    }
    if (i > 0 && !(time[i] > time[i - 1])) {
      throw Error(ErrorCode::Precondition, fmt::format("time not increasing at sample {}", i));
    }
  }
}

std::vector<double> JointTrajectory::accelerations() const {
  if (acceleration) return *acceleration;
  const std::size_t n = time.size();
  std::vector<double> a(n, 0.0);
  if (n < 2) return a;
  a.front() = (velocity[1] - velocity[0]) / (time[1] - time[0]);
  a.back() = (velocity[n - 1] - velocity[n - 2]) / (time[n - 1] - time[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    a[i] = (velocity[i + 1] - velocity[i - 1]) / (time[i + 1] - time[i - 1]);
  }
  return a;
}

TorqueTrace inverse_dynamics(const TransmissionSpec& spec, const FrictionParams& params,
                             const LoadFunction& load, const JointTrajectory& trajectory,
                             const DynamicsOptions& options) {
  spec.validate();
  params.validate();
  trajectory.validate();
  const std::vector<double> acc = trajectory.accelerations();

  TorqueTrace out;
  out.time = trajectory.time;
  out.torque.resize(trajectory.time.size());
  for (std::size_t i = 0; i < trajectory.time.size(); ++i) {
    const double demand = load ? load(trajectory.time[i]) : 0.0;
    out.torque[i] = motor_torque(spec, params, demand, trajectory.velocity[i], acc[i], options);
  }
  return out;
}

std::vector<PayloadPoint> payload_curve(const TransmissionSpec& spec, const FrictionParams& params,
                                        double load, std::span<const double> velocity_grid) {
  spec.validate();
  params.validate();
  for (std::size_t i = 0; i < velocity_grid.size(); ++i) {
    if (!(velocity_grid[i] > 0.0) || (i > 0 && !(velocity_grid[i] > velocity_grid[i - 1]))) {
      throw Error(ErrorCode::Precondition, "payload velocity grid must be positive and ascending");
    }
  }
  std::vector<PayloadPoint> out;
  out.reserve(velocity_grid.size());
  for (double v : velocity_grid) {
    out.push_back(PayloadPoint{v, spec.ratio * v, motor_torque(spec, params, load, v, 0.0)});
  }
  return out;
}

double nrmsd(std::span<const double> simulated, std::span<const double> measured) {
  if (simulated.size() != measured.size() || measured.empty()) {
    throw Error(ErrorCode::MisalignedTraces,
                fmt::format("trace lengths differ ({} vs {})", simulated.size(), measured.size()));
  }
  const auto [lo, hi] = std::minmax_element(measured.begin(), measured.end());
  const double range = *hi - *lo;
  if (range < 1e-12) {
    throw Error(ErrorCode::DegenerateRange, "measured trace has no range");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double d = simulated[i] - measured[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(measured.size())) / range;
}

double nrmsd(const TorqueTrace& simulated, const TorqueTrace& measured) {
  if (simulated.time.size() != measured.time.size()) {
    throw Error(ErrorCode::MisalignedTraces,
                fmt::format("trace lengths differ ({} vs {})", simulated.time.size(),
                            measured.time.size()));
  }
  for (std::size_t i = 0; i < measured.time.size(); ++i) {
    const double t = measured.time[i];
    if (std::abs(simulated.time[i] - t) > 1e-9 * std::max(1.0, std::abs(t))) {
      throw Error(ErrorCode::MisalignedTraces, fmt::format("timestamps differ at sample {}", i));
    }
  }
  return nrmsd(std::span<const double>(simulated.torque), std::span<const double>(measured.torque));
}

}  // namespace ssmkit
