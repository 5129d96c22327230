#include "ecas/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ecas {

namespace {
constexpr double kDistanceClampFraction = 0.05;
}

double attractive_potential(const Point2& q, const Point2& goal, double h) {
  return h * (q - goal).norm();
}

double boundary_repulsion(const Point2& q, std::span<const HalfPlane> boundaries, double alpha) {
  double denom = alpha;
  for (const auto& hp : boundaries) {
    const double g = hp.evaluate(q);
    denom += g + std::abs(g);
  }
  return 1.0 / denom;
}

double weighted_obstacle_distance(const Point2& q, std::span<const ObstaclePoint> obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& obs : obstacles) {
    best = std::min(best, (q - obs.position).norm() / obs.weight);
  }
  return best;
}

double obstacle_repulsion(const Point2& q, std::span<const ObstaclePoint> obstacles,
                          double q_star, double delta) {
  const double d = weighted_obstacle_distance(q, obstacles);
  if (d > q_star) return 0.0;
  const double d_eff = std::max(d, kDistanceClampFraction * q_star);
  const double gap = 1.0 / d_eff - 1.0 / q_star;
  return gap * gap / (2.0 * delta);
}

double obstacle_repulsion_ceiling(double q_star, double delta) {
  const double gap = 1.0 / (kDistanceClampFraction * q_star) - 1.0 / q_star;
  return gap * gap / (2.0 * delta);
}

double total_potential(const Point2& q, const Point2& goal, double h,
                       std::span<const HalfPlane> boundaries, double alpha,
                       std::span<const ObstaclePoint> obstacles, double q_star, double delta) {
  return attractive_potential(q, goal, h) + boundary_repulsion(q, boundaries, alpha) +
         obstacle_repulsion(q, obstacles, q_star, delta);
}

}  // namespace ecas
