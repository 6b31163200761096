#include "ssmkit/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "ssmkit/error.hpp"
#include "ssmkit/io.hpp"
#include "ssmkit/subproblems.hpp"

namespace ssmkit {

namespace {

constexpr double kPi = std::numbers::pi;

double polar_from(const Vec3& axis, const Vec3& p) {
  return std::acos(std::clamp(axis.dot(p) / p.norm(), -1.0, 1.0));
}

}  // namespace

double dot_profile(const MechanismGeometry& geom, double theta2) {
  return geom.omega1.dot(rodrigues(geom.omega2, theta2) * geom.v4);
}

DotProfileDerivatives dot_profile_derivatives(const MechanismGeometry& geom, double theta2) {
  const Vec3 rotated = rodrigues(geom.omega2, theta2) * geom.v4;
  const Mat3 w2_hat = hat(geom.omega2);
  return DotProfileDerivatives{geom.omega1.cross(geom.omega2).dot(rotated),
                               geom.omega1.dot(w2_hat * (w2_hat * rotated))};
}

std::array<Vec3, 2> critical_directions(const MechanismGeometry& geom) {
  const double sa = std::sin(geom.alpha);
  if (sa < 1e-9) {
    throw Error(ErrorCode::DegenerateGeometry, "first two axes are parallel");
  }
  const double sb = std::sin(geom.beta);
  return {(sb / sa) * geom.omega1 + (std::sin(geom.alpha - geom.beta) / sa) * geom.omega2,
          -(sb / sa) * geom.omega1 + (std::sin(geom.alpha + geom.beta) / sa) * geom.omega2};
}

std::array<double, 2> critical_angles(const MechanismGeometry& geom) {
  const auto dirs = critical_directions(geom);
  const Twist xi2 = geom.twist(2);
  std::array<double, 2> out{};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto s = subproblem1(xi2, geom.v4, dirs[i]);
    out[i] = s.empty() ? std::numeric_limits<double>::quiet_NaN() : s[0][0];
  }
  return out;
}

double fold_polar(double angle) {
  double a = std::fmod(std::abs(angle), 2.0 * kPi);
  if (a > kPi) a = 2.0 * kPi - a;
  return a;
}

TiltExtremes tilt_extremes(double alpha, double beta) {
  const auto in_range = [](double a) { return std::isfinite(a) && a > 0.0 && a < kPi; };
  if (!in_range(alpha) || !in_range(beta)) {
    throw Error(ErrorCode::Domain, "axis angles must lie in (0, pi)");
  }
  TiltExtremes t;
  t.phi_values = {fold_polar(alpha + beta), fold_polar(-(alpha + beta)), fold_polar(alpha - beta),
                  fold_polar(-(alpha - beta))};
  t.tilt_min = std::abs(alpha - beta);
  t.tilt_max = std::min(alpha + beta, 2.0 * kPi - (alpha + beta));
  t.span = t.tilt_max - t.tilt_min;
  t.signed_min = -t.tilt_max;
  t.signed_max = -t.tilt_min;
  return t;
}

std::vector<WorkspaceSample> sample_workspace(const MechanismGeometry& geom, std::size_t n1,
                                              std::size_t n2) {
  if (n1 < 2 || n2 < 2) {
    throw Error(ErrorCode::Precondition, "workspace grid needs at least 2 samples per axis");
  }
  // Inner rotation computed once per theta2.
  std::vector<Vec3> inner(n2);
  std::vector<double> theta2s(n2);
  for (std::size_t j = 0; j < n2; ++j) {
    theta2s[j] = -kPi + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n2);
    inner[j] = rodrigues(geom.omega2, theta2s[j]) * geom.v4;
  }

  std::vector<WorkspaceSample> out;
  out.reserve(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    const double theta1 = -kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n1);
    const Rot3 outer = rodrigues(geom.omega1, theta1);
    for (std::size_t j = 0; j < n2; ++j) {
      WorkspaceSample s;
      s.theta1 = theta1;
      s.theta2 = theta2s[j];
      s.point = outer * inner[j];
      s.polar_angle = polar_from(geom.omega1, s.point);
      out.push_back(s);
    }
  }
  return out;
}

std::array<double, 2> sampled_band(const std::vector<WorkspaceSample>& samples) {
  std::array<double, 2> band{std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()};
  for (const auto& s : samples) {
    band[0] = std::min(band[0], s.polar_angle);
    band[1] = std::max(band[1], s.polar_angle);
  }
  return band;
}

void write_workspace_csv(std::ostream& os, const std::vector<WorkspaceSample>& samples) {
  os << "theta1_rad,theta2_rad,x,y,z,polar_deg\n";
  for (const auto& s : samples) {
    os << format_number(s.theta1) << ',' << format_number(s.theta2) << ','
       << format_number(s.point.x()) << ',' << format_number(s.point.y()) << ','
       << format_number(s.point.z()) << ',' << format_number(s.polar_angle * 180.0 / kPi) << '\n';
  }
}

}  // namespace ssmkit
