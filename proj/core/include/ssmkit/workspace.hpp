#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "ssmkit/kinematics.hpp"

namespace ssmkit {

/// f(theta2) = omega1 . exp(hat(omega2) theta2) v4, the cosine of the polar
/// angle of the tool axis from omega1. Independent of theta1.
double dot_profile(const MechanismGeometry& geom, double theta2);

struct DotProfileDerivatives {
  double first = 0.0;
  double second = 0.0;
};

DotProfileDerivatives dot_profile_derivatives(const MechanismGeometry& geom, double theta2);

/// The two in-plane positions of the rotated tool axis where f' = 0:
///   [0] =  (sin b / sin a) w1 + (sin(a - b) / sin a) w2   (polar angle |a - b|)
///   [1] = -(sin b / sin a) w1 + (sin(a + b) / sin a) w2   (polar angle a + b, folded)
std::array<Vec3, 2> critical_directions(const MechanismGeometry& geom);

/// theta2 values at which the tool axis reaches critical_directions(), in
/// the same order.
std::array<double, 2> critical_angles(const MechanismGeometry& geom);

/// Tilt band of the workspace in polar angle from omega1.
struct TiltExtremes {
  /// +(a+b), -(a+b), +(a-b), -(a-b) folded into [0, pi].
  std::array<double, 4> phi_values{};
  double tilt_min = 0.0;
  double tilt_max = 0.0;
  double span = 0.0;
  /// Same band in the signed plane-section convention (negative side of
  /// omega1): [-tilt_max, -tilt_min].
  double signed_min = 0.0;
  double signed_max = 0.0;
};

/// Folds an angle into a polar angle in [0, pi].
double fold_polar(double angle);

TiltExtremes tilt_extremes(double alpha, double beta);

struct WorkspaceSample {
  double theta1 = 0.0;
  double theta2 = 0.0;
  Vec3 point = Vec3::Zero();
  double polar_angle = 0.0;
};

/// Tool-axis points on the unit sphere over a uniform theta1 x theta2 grid
/// on [-pi, pi). Ordered with theta1 as the outer index.
std::vector<WorkspaceSample> sample_workspace(const MechanismGeometry& geom, std::size_t n1,
                                              std::size_t n2);

/// Min/max polar angle over the samples.
std::array<double, 2> sampled_band(const std::vector<WorkspaceSample>& samples);

/// CSV with header theta1_rad,theta2_rad,x,y,z,polar_deg.
void write_workspace_csv(std::ostream& os, const std::vector<WorkspaceSample>& samples);

}  // namespace ssmkit
