// Basic planar geometry: points, circle arcs, tolerances and errors shared
// by the mesh and quadrature layers.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hho2d {

using Point2 = Eigen::Vector2d;

/// Base class of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file.
struct ParseError : Error {
  using Error::Error;
};

/// Inconsistent mesh connectivity (open loops, dangling faces, ...).
struct TopologyError : Error {
  using Error::Error;
};

/// Invalid geometry (arc endpoint off its circle, negative areas, ...).
struct GeometryError : Error {
  using Error::Error;
};

/// Numerical-rank failure in a local Gram or mass matrix.
struct ConditioningError : Error {
  using Error::Error;
};

/// Failure of a local or global linear solve.
struct SolveError : Error {
  using Error::Error;
};

/// A circle supporting curved boundary faces.
struct ArcGeometry {
  Point2 center{0.0, 0.0};
  double radius = 0.0;

  double signed_distance(const Point2& p) const {
    return (p - center).norm() - radius;
  }
  Point2 project(const Point2& p) const {
    const Point2 d = p - center;
    const double n = d.norm();
    if (n == 0.0) throw GeometryError("cannot project circle center onto circle");
    return center + (radius / n) * d;
  }
  Point2 at_angle(double theta) const {
    return center + radius * Point2(std::cos(theta), std::sin(theta));
  }
  double angle_of(const Point2& p) const {
    return std::atan2(p.y() - center.y(), p.x() - center.x());
  }
};

inline Point2 rot90_ccw(const Point2& v) { return {-v.y(), v.x()}; }
inline Point2 rot90_cw(const Point2& v) { return {v.y(), -v.x()}; }
inline double cross2(const Point2& a, const Point2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Wrap an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  a = std::fmod(a, two_pi);
  if (a <= -M_PI) a += two_pi;
  if (a > M_PI) a -= two_pi;
  return a;
}

}  // namespace hho2d
