// Frames on the unit sphere, angle charts, small linear-algebra helpers.
#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "scatrel/errors.hpp"

namespace scatrel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec rot90(const Vec& v) {
  Vec w(2);
  w << -v[1], v[0];
  return w;
}

// Deterministic orthonormal basis of v^perp for a unit vector v, returned as
// the columns of an n x (n-1) matrix.  For n = 2 the single column is the
// counterclockwise rotation of v, which is continuous in v (no branch cuts).
// For n >= 3 we Gram-Schmidt the coordinate axes, skipping the axis with the
// largest |v_i| (ties broken by the smallest index); the remaining axes are
// taken in increasing index order.  The skip rule is the documented branch:
// the frame is constant on each region where the dominant axis is fixed.
inline Mat orthonormal_frame(const Vec& v) {
  const int n = static_cast<int>(v.size());
  if (n < 2) throw DomainError("orthonormal_frame: dimension must be >= 2");
  if (std::abs(v.norm() - 1.0) > 1e-9)
    throw DomainError("orthonormal_frame: vector must be unit");
  if (n == 2) {
    Mat f(2, 1);
    f.col(0) = rot90(v);
    return f;
  }
  int pivot = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
  Mat f(n, n - 1);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i == pivot) continue;
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    e -= e.dot(v) * v;
    for (int j = 0; j < col; ++j) e -= e.dot(f.col(j)) * f.col(j);
    f.col(col++) = e.normalized();
  }
  return f;
}

// Unit vector on S^1 from its angle chart.
inline Vec unit_from_angle(double a) {
  Vec v(2);
  v << std::cos(a), std::sin(a);
  return v;
}

inline double angle_of(const Vec& v) { return std::atan2(v[1], v[0]); }

// Wrap an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  a = std::fmod(a, two_pi);
  if (a <= -M_PI) a += two_pi;
  if (a > M_PI) a -= two_pi;
  return a;
}

// Standard symplectic matrix J of size 2n x 2n: J = [[0, I], [-I, 0]].
inline Mat symplectic_J(int n) {
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.block(0, n, n, n) = Mat::Identity(n, n);
  J.block(n, 0, n, n) = -Mat::Identity(n, n);
  return J;
}

// Rotation by angle a in the plane (for rotation-equivariance checks, n = 2).
inline Mat rotation2(double a) {
  Mat r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

} // namespace scatrel
