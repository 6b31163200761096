#pragma once

// Closed-form geometric subproblems used by the inverse kinematics. All
// rotation axes pass through the origin (the remote center of motion).

#include <array>
#include <cstddef>

#include "ssmkit/screws.hpp"

namespace ssmkit {

/// Zero, one or two solution tuples, sorted ascending (lexicographically).
/// An empty set means the subproblem has no real solution.
template <std::size_t N>
class SubproblemSolutions {
 public:
  using Tuple = std::array<double, N>;

  std::size_t multiplicity() const { return count_; }
  bool empty() const { return count_ == 0; }
  const Tuple& operator[](std::size_t i) const { return values_[i]; }
  const Tuple* begin() const { return values_.data(); }
  const Tuple* end() const { return values_.data() + count_; }

  void push(const Tuple& t) {
    values_[count_++] = t;
    if (count_ == 2 && values_[1] < values_[0]) std::swap(values_[0], values_[1]);
  }

 private:
  std::array<Tuple, 2> values_{};
  std::size_t count_ = 0;
};

/// Tangency band on the discriminant of the translation subproblem.
inline constexpr double kTangencyBand = 1e-12;

/// theta with exp(xi theta) p = q. Throws DegenerateInput when p (or q) lies
/// on the axis; returns an empty set when p and q are not on a common
/// circle about the axis.
SubproblemSolutions<1> subproblem1(const Twist& xi, const Vec3& p, const Vec3& q);

/// (theta1, theta2) with exp(xi1 theta1) exp(xi2 theta2) p = q for two
/// intersecting, non-parallel axes. Throws DegenerateAxes for parallel axes.
/// When an angle is indeterminate (point on that axis) it is reported as 0.
SubproblemSolutions<2> subproblem2(const Twist& xi1, const Twist& xi2, const Vec3& p,
                                   const Vec3& q);

/// Translation to a given distance: all theta with |q - (p + v theta)| = delta.
/// `v` must be unit and delta > 0.
SubproblemSolutions<1> subproblem3prime(const Vec3& v, const Vec3& p, const Vec3& q,
                                        double delta);

}  // namespace ssmkit
