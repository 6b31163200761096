#include "ssmkit/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ssmkit/error.hpp"
#include "ssmkit/subproblems.hpp"

namespace ssmkit {

Twist MechanismGeometry::twist(int joint) const {
  switch (joint) {
    case 1: return Twist::revolute(omega1);
    case 2: return Twist::revolute(omega2);
    case 3: return Twist::revolute(omega3);
    case 4: return Twist::prismatic(v4);
    default: throw Error(ErrorCode::Precondition, fmt::format("no joint {}", joint));
  }
}

MechanismGeometry build_geometry(double alpha, double beta, const Rot3& r0) {
  const auto in_range = [](double a) { return std::isfinite(a) && a > 0.0 && a < std::numbers::pi; };
  if (!in_range(alpha) || !in_range(beta)) {
    throw Error(ErrorCode::Domain,
                fmt::format("axis angles must lie in (0, 180) deg (alpha = {:.9g} deg, beta = {:.9g} deg)",
                            alpha * 180.0 / std::numbers::pi, beta * 180.0 / std::numbers::pi));
  }
  MechanismGeometry g;
  g.alpha = alpha;
  g.beta = beta;
  g.omega1 = Vec3::UnitZ();
  g.omega2 = Vec3(std::sin(alpha), 0.0, std::cos(alpha));
  g.omega3 = Vec3(std::sin(alpha + beta), 0.0, std::cos(alpha + beta));
  g.v4 = g.omega3;
  g.r0 = r0;
  return g;
}

JointState JointState::normalized() const {
  return {normalize_angle(theta1), normalize_angle(theta2), normalize_angle(theta3), theta4};
}

Pose forward_kinematics(const MechanismGeometry& geom, const JointState& theta) {
  const Rot3 r12 = rodrigues(geom.omega1, theta.theta1) * rodrigues(geom.omega2, theta.theta2);
  return Pose{r12 * rodrigues(geom.omega3, theta.theta3) * geom.r0, r12 * (geom.v4 * theta.theta4)};
}

ProbePoints probe_point_defaults(const MechanismGeometry& geom) {
  const Vec3 p2 = geom.omega3;
  if ((p2 - geom.omega2 * geom.omega2.dot(p2)).norm() < kInputTolerance) {
    throw Error(ErrorCode::DegenerateGeometry, "third axis coincides with the second axis");
  }
  // omega3 lies in the xz-plane, so the plane normal is always orthogonal to it.
  const Vec3 p3 = geom.omega1.cross(geom.omega2).normalized();
  return ProbePoints{geom.v4, p2, p3};
}

bool IkSolutionSet::singular() const {
  return std::any_of(branches.begin(), branches.end(), [](const IkBranch& b) { return b.singular; });
}

PoseError pose_error(const Pose& a, const Pose& b) {
  return PoseError{(a.position - b.position).norm(),
                   (a.rotation.matrix() - b.rotation.matrix()).norm()};
}

IkSolutionSet inverse_kinematics(const MechanismGeometry& geom, const Pose& target,
                                 const IkOptions& options) {
  const ProbePoints probes = probe_point_defaults(geom);
  const Twist xi1 = geom.twist(1);
  const Twist xi2 = geom.twist(2);
  const Twist xi3 = geom.twist(3);
  const Twist xi4 = geom.twist(4);

  // g1 = g_d g0^-1 with g0 = (R0, 0).
  const Pose g1 = pose_compose(target, pose_inverse(Pose{geom.r0, Vec3::Zero()}));

  // Step 1: the distance from the RCM to g1 p1 is preserved by the three
  // rotations, leaving a translation-to-distance problem in theta4.
  const Vec3 rcm = Vec3::Zero();
  const double delta = (pose_apply(g1, probes.p1) - rcm).norm();
  SubproblemSolutions<1> theta4_roots;
  if (delta > 0.0) {
    theta4_roots = subproblem3prime(geom.v4, probes.p1, rcm, delta);
  } else {
    theta4_roots.push({-geom.v4.dot(probes.p1)});
  }

  IkSolutionSet out;
  for (const auto& [theta4] : theta4_roots) {
    // Step 2: p2 is fixed by the third rotation, so
    // exp(xi1 th1) exp(xi2 th2) p2 = g1 exp(-xi4 th4) p2.
    const Pose g1_no_slide = pose_compose(g1, twist_exp(xi4, -theta4));
    const Vec3 q2 = pose_apply(g1_no_slide, probes.p2);

    const double along = std::clamp(q2.normalized().dot(geom.omega1), -1.0, 1.0);
    const bool singular = q2.norm() > 0.0 && std::acos(std::abs(along)) < options.singular_angle;

    SubproblemSolutions<2> pairs;
    if (singular) {
      // Tool axis on the roll axis: theta1 is free, fix it to zero and let
      // theta3 absorb the roll.
      const auto s = subproblem1(xi2, probes.p2, q2);
      if (!s.empty()) pairs.push({0.0, s[0][0]});
    } else {
      pairs = subproblem2(xi1, xi2, probes.p2, q2);
    }

    for (const auto& [theta1, theta2] : pairs) {
      // Step 3: exp(xi3 th3) p3 = exp(-xi2 th2) exp(-xi1 th1) g1 exp(-xi4 th4) p3.
      const Pose lhs_inv = pose_compose(twist_exp(xi2, -theta2), twist_exp(xi1, -theta1));
      const Vec3 q3 = pose_apply(pose_compose(lhs_inv, g1_no_slide), probes.p3);
      if ((q3 - geom.omega3 * geom.omega3.dot(q3)).norm() < kInputTolerance) continue;
      const auto s3 = subproblem1(xi3, probes.p3, q3);
      if (s3.empty()) continue;

      IkBranch branch;
      branch.joints = JointState{theta1, theta2, s3[0][0], theta4}.normalized();
      branch.singular = singular;
      const PoseError err = pose_error(forward_kinematics(geom, branch.joints), target);
      branch.position_error = err.position;
      branch.rotation_error = err.rotation;

      const double tol =
          singular ? options.singular_residual_tolerance : options.residual_tolerance;
      if (err.position > tol || err.rotation > tol) continue;

      const bool duplicate =
          std::any_of(out.branches.begin(), out.branches.end(), [&](const IkBranch& b) {
            return std::abs(b.joints.theta1 - branch.joints.theta1) < 1e-12 &&
                   std::abs(b.joints.theta2 - branch.joints.theta2) < 1e-12 &&
                   std::abs(b.joints.theta3 - branch.joints.theta3) < 1e-12 &&
                   std::abs(b.joints.theta4 - branch.joints.theta4) < 1e-12;
          });
      if (!duplicate) out.branches.push_back(branch);
    }
  }

  if (out.branches.empty()) {
    throw Error(ErrorCode::Unreachable, "target pose is outside the mechanism workspace");
  }
  for (std::size_t i = 0; i < out.branches.size(); ++i) {
    if (out.branches[i].joints.theta4 >= 0.0) {
      out.preferred = i;
      break;
    }
  }
  return out;
}

}  // namespace ssmkit
