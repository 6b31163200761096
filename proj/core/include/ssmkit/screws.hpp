#pragma once

#include <Eigen/Dense>

namespace ssmkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance for unit-norm and orthonormality checks on caller-supplied data.
inline constexpr double kInputTolerance = 1e-9;

/// Wraps an angle to (-pi, pi].
double normalize_angle(double angle);

/// Skew-symmetric matrix with hat(w) * v == w.cross(v).
Mat3 hat(const Vec3& w);

/// Proper rotation matrix. Constructed only through checked factories, so
/// every instance satisfies R^T R = I and det R = +1.
class Rot3 {
 public:
  Rot3() : m_(Mat3::Identity()) {}

  static Rot3 identity() { return Rot3(); }

  /// Accepts a matrix that is a rotation within `tolerance` and projects it
  /// onto SO(3). Throws Error(Precondition) otherwise.
  static Rot3 from_matrix(const Mat3& m, double tolerance = kInputTolerance);

  const Mat3& matrix() const { return m_; }
  Rot3 transpose() const { return Rot3(m_.transpose(), Unchecked{}); }

  Rot3 operator*(const Rot3& other) const { return Rot3(m_ * other.m_, Unchecked{}); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  struct Unchecked {};
  Rot3(const Mat3& m, Unchecked) : m_(m) {}

  friend Rot3 rodrigues(const Vec3& axis, double angle);

  Mat3 m_;
};

/// Rigid transform g = (R, p) acting on points as R x + p.
struct Pose {
  Rot3 rotation;
  Vec3 position = Vec3::Zero();

  static Pose identity() { return Pose{}; }
};

enum class JointKind { Revolute, Prismatic };

/// Unit twist of a zero-pitch joint through the origin or a pure
/// translation. General finite-pitch screws are not modelled.
class Twist {
 public:
  static Twist revolute(const Vec3& axis);
  static Twist prismatic(const Vec3& direction);

  const Vec3& linear() const { return linear_; }
  const Vec3& angular() const { return angular_; }
  JointKind kind() const { return kind_; }

 private:
  Twist(const Vec3& linear, const Vec3& angular, JointKind kind)
      : linear_(linear), angular_(angular), kind_(kind) {}

  Vec3 linear_;
  Vec3 angular_;
  JointKind kind_;
};

/// exp(hat(axis) * angle) by the Rodrigues formula. `axis` must be unit
/// within 1e-9.
Rot3 rodrigues(const Vec3& axis, double angle);

/// Exponential of a unit twist: (rodrigues(w, theta), 0) for revolute,
/// (I, v theta) for prismatic.
Pose twist_exp(const Twist& xi, double theta);

Vec3 pose_apply(const Pose& g, const Vec3& p);
Pose pose_compose(const Pose& a, const Pose& b);
Pose pose_inverse(const Pose& g);

}  // namespace ssmkit
