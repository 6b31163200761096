#pragma once

// Actuator-reflected dynamics of a joint driven through a self-locking
// transmission (worm gear or lead screw):
//
//   J * dw/dt = T(w, load)
//
// where J is the inertia reflected to the motor shaft and T collects the
// bearing friction (b_c, b_v), the sliding friction of the transmission
// (mu_s at rest, mu_c in motion) and the reflected load. All torques are
// motor-side; joint velocities are rad/s (worm) or m/s (lead screw).

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ssmkit {

struct FrictionParams {
  double mu_s = 0.0;  // static transmission friction
  double mu_c = 0.0;  // Coulomb (sliding) transmission friction
  double b_c = 0.0;   // bearing Coulomb torque, N*m
  double b_v = 0.0;   // bearing viscous coefficient, N*m*s/rad

  /// Throws Error(Precondition) on negative values or mu_s < mu_c.
  void validate() const;
};

enum class TransmissionKind { WormGear, LeadScrew };

struct TransmissionSpec {
  TransmissionKind kind = TransmissionKind::WormGear;
  double ratio = 1.0;              // motor rad per joint rad (or per joint m)
  double lead_angle = 0.0;         // rad, in (0, pi/2)
  double reflected_inertia = 0.0;  // kg*m^2 at the motor shaft

  void validate() const;

  /// Statically self-locking for the given friction coefficient.
  bool self_locking(double mu) const;
};

enum class PowerFlow { Driving, Overhauling };
enum class FrictionRegime { Kinetic, Static };

/// Inclined-plane efficiency with friction angle rho = atan(mu), mu = mu_c
/// (kinetic) or mu_s (static):
///   driving      tan(l) / tan(l + rho)
///   overhauling  tan(l - rho) / tan(l), 0 when l <= rho
/// Throws Error(Domain) if l + rho >= pi/2.
double transmission_efficiency(const TransmissionSpec& spec, const FrictionParams& params,
                               PowerFlow flow, FrictionRegime regime = FrictionRegime::Kinetic);

/// Motor-side torque needed to carry `load` (joint-side demand, N*m or N)
/// while moving in direction `direction` (+1 or -1).
double reflected_load_torque(const TransmissionSpec& spec, const FrictionParams& params,
                             double load, int direction,
                             FrictionRegime regime = FrictionRegime::Kinetic);

struct DynamicsOptions {
  /// |motor velocity| below this is treated as rest (rad/s).
  double static_band = 1e-6;
};

/// Motor torque for one sample of joint velocity/acceleration.
double motor_torque(const TransmissionSpec& spec, const FrictionParams& params, double load,
                    double joint_velocity, double joint_acceleration,
                    const DynamicsOptions& options = {});

struct JointTrajectory {
  std::vector<double> time;      // s, strictly increasing
  std::vector<double> velocity;  // joint units per s
  std::optional<std::vector<double>> acceleration;

  void validate() const;

  /// The provided accelerations, or central differences of the velocity
  /// (one-sided at the ends).
  std::vector<double> accelerations() const;
};

struct TorqueTrace {
  std::vector<double> time;    // s
  std::vector<double> torque;  // N*m at the motor shaft
};

/// Joint-side load demand as a function of time.
using LoadFunction = std::function<double(double)>;

TorqueTrace inverse_dynamics(const TransmissionSpec& spec, const FrictionParams& params,
                             const LoadFunction& load, const JointTrajectory& trajectory,
                             const DynamicsOptions& options = {});

struct PayloadPoint {
  double joint_velocity = 0.0;
  double motor_velocity = 0.0;
  double motor_torque = 0.0;
};

/// Steady-state (zero acceleration) motor torque over a positive ascending
/// grid of joint velocities carrying a constant load.
std::vector<PayloadPoint> payload_curve(const TransmissionSpec& spec, const FrictionParams& params,
                                        double load, std::span<const double> velocity_grid);

/// RMS deviation normalized by the measured range (max - min).
double nrmsd(const TorqueTrace& simulated, const TorqueTrace& measured);

/// Same, for bare sample vectors of equal length.
double nrmsd(std::span<const double> simulated, std::span<const double> measured);

}  // namespace ssmkit
