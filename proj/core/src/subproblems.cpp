#include "ssmkit/subproblems.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ssmkit/error.hpp"

namespace ssmkit {

namespace {

void require_revolute(const Twist& xi) {
  if (xi.kind() != JointKind::Revolute) {
    throw Error(ErrorCode::Precondition, "subproblem requires a revolute twist");
  }
}

// Consistency checks scale with the size of the points involved.
double scaled_tol(double a, double b) { return kInputTolerance * std::max({1.0, a, b}); }

}  // namespace

SubproblemSolutions<1> subproblem1(const Twist& xi, const Vec3& p, const Vec3& q) {
  require_revolute(xi);
  const Vec3& w = xi.angular();

  const Vec3 p_perp = p - w * w.dot(p);
  const Vec3 q_perp = q - w * w.dot(q);
  const double tol = scaled_tol(p.norm(), q.norm());
  if (p_perp.norm() <= tol || q_perp.norm() <= tol) {
    throw Error(ErrorCode::DegenerateInput, "point lies on the rotation axis");
  }

  SubproblemSolutions<1> out;
  if (std::abs(w.dot(p) - w.dot(q)) > tol || std::abs(p_perp.norm() - q_perp.norm()) > tol) {
    return out;
  }
  out.push({std::atan2(w.dot(p_perp.cross(q_perp)), p_perp.dot(q_perp))});
  return out;
}

SubproblemSolutions<2> subproblem2(const Twist& xi1, const Twist& xi2, const Vec3& p,
                                   const Vec3& q) {
  require_revolute(xi1);
  require_revolute(xi2);
  const Vec3& w1 = xi1.angular();
  const Vec3& w2 = xi2.angular();

  const Vec3 n = w1.cross(w2);
  const double n2 = n.squaredNorm();
  if (n2 < 1e-18) {
    throw Error(ErrorCode::DegenerateAxes, "subproblem 2 axes are parallel");
  }

  SubproblemSolutions<2> out;
  const double tol = scaled_tol(p.norm(), q.norm());
  if (std::abs(p.norm() - q.norm()) > tol) return out;

  // Intermediate point z = exp(xi2 th2) p = exp(-xi1 th1) q, written as
  // a w1 + b w2 + g (w1 x w2). Its projections on w2 and w1 are fixed by p
  // and q; the norm fixes g.
  const double c12 = w1.dot(w2);
  const double denom = c12 * c12 - 1.0;
  const double a = (c12 * w2.dot(p) - w1.dot(q)) / denom;
  const double b = (c12 * w1.dot(q) - w2.dot(p)) / denom;
  const double g2 = (p.squaredNorm() - a * a - b * b - 2.0 * a * b * c12) / n2;

  const double band = 1e-13 * std::max(1.0, p.squaredNorm());
  if (g2 < -band) return out;

  const Vec3 base = a * w1 + b * w2;
  const double g = g2 > band ? std::sqrt(g2) : 0.0;
  const int roots = g2 > band ? 2 : 1;

  for (int k = 0; k < roots; ++k) {
    const Vec3 z = base + (k == 0 ? g : -g) * n;

    // theta2: rotate p to z about w2; theta1: rotate z to q about w1.
    const auto solve_or_zero = [&](const Twist& xi, const Vec3& from, const Vec3& to) {
      const Vec3& w = xi.angular();
      const double t = scaled_tol(from.norm(), to.norm());
      if ((from - w * w.dot(from)).norm() <= t || (to - w * w.dot(to)).norm() <= t) {
        return 0.0;
      }
      const auto s = subproblem1(xi, from, to);
      if (!s.empty()) return s[0][0];
      // z is built to satisfy both constraints; a miss here is rounding at
      // the tolerance edge, so fall back to the planar angle.
      const Vec3 f = from - w * w.dot(from);
      const Vec3 u = to - w * w.dot(to);
      return std::atan2(w.dot(f.cross(u)), f.dot(u));
    };
    const double th2 = solve_or_zero(xi2, p, z);
    const double th1 = solve_or_zero(xi1, z, q);
    out.push({th1, th2});
  }
  return out;
}

SubproblemSolutions<1> subproblem3prime(const Vec3& v, const Vec3& p, const Vec3& q,
                                        double delta) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kInputTolerance) {
    throw Error(ErrorCode::Precondition, "translation direction must be a unit vector");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::Precondition, fmt::format("distance must be positive (got {})", delta));
  }
  const Vec3 u = q - p;
  const double uv = u.dot(v);
  const double disc = uv * uv + delta * delta - u.squaredNorm();

  SubproblemSolutions<1> out;
  if (disc < -kTangencyBand) return out;
  if (disc <= kTangencyBand) {
    out.push({uv});
    return out;
  }
  const double r = std::sqrt(disc);
  out.push({uv - r});
  out.push({uv + r});
  return out;
}

}  // namespace ssmkit
