#pragma once

#include <optional>
#include <vector>

#include "ssmkit/screws.hpp"

namespace ssmkit {

/// Three revolute axes meeting at the remote center of motion (the origin)
/// plus a translation along the third axis.
///
/// Canonical placement: omega1 = z, omega2 in the xz-plane at angle alpha
/// from omega1, omega3 obtained by rotating omega2 by beta about the normal
/// of the omega1-omega2 plane. At the home configuration the tool axis sits
/// at polar angle alpha + beta from omega1.
struct MechanismGeometry {
  double alpha = 0.0;
  double beta = 0.0;
  Vec3 omega1 = Vec3::UnitZ();
  Vec3 omega2 = Vec3::UnitX();
  Vec3 omega3 = -Vec3::UnitZ();
  Vec3 v4 = -Vec3::UnitZ();
  Rot3 r0;

  /// Unit twist of joint 1..4.
  Twist twist(int joint) const;
};

/// Throws Error(Domain) unless alpha, beta are in (0, pi).
MechanismGeometry build_geometry(double alpha, double beta, const Rot3& r0 = Rot3::identity());

/// theta1..theta3 in radians, theta4 in meters.
struct JointState {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;

  /// Copy with the revolute angles wrapped to (-pi, pi].
  JointState normalized() const;
};

Pose forward_kinematics(const MechanismGeometry& geom, const JointState& theta);

/// Points used to reduce the inverse kinematics to subproblems: p1 on the
/// translation axis, p2 on the third revolute axis, p3 off it.
struct ProbePoints {
  Vec3 p1;
  Vec3 p2;
  Vec3 p3;
};

ProbePoints probe_point_defaults(const MechanismGeometry& geom);

struct IkBranch {
  JointState joints;
  double position_error = 0.0;  // meters
  double rotation_error = 0.0;  // Frobenius norm of the rotation difference
  bool singular = false;        // theta1 fixed to 0 (tool axis on omega1)
};

struct IkSolutionSet {
  std::vector<IkBranch> branches;
  /// First branch with theta4 >= 0, when one exists.
  std::optional<std::size_t> preferred;

  bool singular() const;
};

struct IkOptions {
  double residual_tolerance = 1e-9;
  double singular_residual_tolerance = 1e-6;
  /// Angle between the tool axis and +-omega1 below which theta1 is
  /// treated as indeterminate.
  double singular_angle = 1e-8;
};

/// Closed-form inverse kinematics. Every returned branch reproduces the
/// target within the residual tolerance. Throws Error(Unreachable) when no
/// branch does.
IkSolutionSet inverse_kinematics(const MechanismGeometry& geom, const Pose& target,
                                 const IkOptions& options = {});

/// Position and Frobenius rotation differences between two poses.
struct PoseError {
  double position = 0.0;
  double rotation = 0.0;
};

PoseError pose_error(const Pose& a, const Pose& b);

}  // namespace ssmkit
