#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace ecas {

using Point2 = Eigen::Vector2d;

inline bool is_finite(const Point2& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y());
}

// Oriented boundary line g(q) = a*x + b*y + c, normalized so a^2 + b^2 = 1.
// The drivable side is g(q) >= 0; a convex region is the intersection of
// several half-planes.
struct HalfPlane {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  HalfPlane() = default;
  HalfPlane(double a_in, double b_in, double c_in) {
    const double n = std::hypot(a_in, b_in);
    if (n == 0.0 || !std::isfinite(n)) {
      throw std::invalid_argument("half-plane normal must be nonzero and finite");
    }
    a = a_in / n;
    b = b_in / n;
    c = c_in / n;
  }

  double evaluate(const Point2& q) const { return a * q.x() + b * q.y() + c; }
};

}  // namespace ecas
