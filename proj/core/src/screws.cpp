#include "ssmkit/screws.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "ssmkit/error.hpp"

namespace ssmkit {

namespace {

void require_unit(const Vec3& v, const char* what) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kInputTolerance) {
    throw Error(ErrorCode::Precondition,
                fmt::format("{} must be a unit vector (norm {:.12g})", what, v.norm()));
  }
}

}  // namespace

double normalize_angle(double angle) {
  double r = std::remainder(angle, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Rot3 Rot3::from_matrix(const Mat3& m, double tolerance) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::Precondition, "rotation matrix has non-finite entries");
  }
  const double orth = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = m.determinant();
  if (orth > tolerance || std::abs(det - 1.0) > tolerance) {
    throw Error(ErrorCode::Precondition,
                fmt::format("matrix is not a rotation (|RtR - I| = {:.3g}, det = {:.12g})",
                            orth, det));
  }
  // Nearest rotation in the Frobenius sense.
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Rot3(svd.matrixU() * svd.matrixV().transpose(), Unchecked{});
}

Twist Twist::revolute(const Vec3& axis) {
  require_unit(axis, "revolute axis");
  return Twist(Vec3::Zero(), axis.normalized(), JointKind::Revolute);
}

Twist Twist::prismatic(const Vec3& direction) {
  require_unit(direction, "prismatic direction");
  return Twist(direction.normalized(), Vec3::Zero(), JointKind::Prismatic);
}

Rot3 rodrigues(const Vec3& axis, double angle) {
  require_unit(axis, "rotation axis");
  const Vec3 w = axis.normalized();
  const Mat3 w_hat = hat(w);
  // Outer-product form keeps R^T R = I to rounding.
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Mat3 r = c * Mat3::Identity() + s * w_hat + (1.0 - c) * (w * w.transpose());
  return Rot3(r, Rot3::Unchecked{});
}

Pose twist_exp(const Twist& xi, double theta) {
  if (xi.kind() == JointKind::Revolute) {
    return Pose{rodrigues(xi.angular(), theta), Vec3::Zero()};
  }
  return Pose{Rot3::identity(), xi.linear() * theta};
}

Vec3 pose_apply(const Pose& g, const Vec3& p) { return g.rotation * p + g.position; }

Pose pose_compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation * b.rotation, a.rotation * b.position + a.position};
}

Pose pose_inverse(const Pose& g) {
  const Rot3 rt = g.rotation.transpose();
  return Pose{rt, -(rt * g.position)};
}

}  // namespace ssmkit
