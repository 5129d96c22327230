#pragma once

#include <span>
#include <vector>

#include "ecas/geometry.hpp"

namespace ecas {

// A rasterized hazard sample: a pedestrian's latest observed position
// (time_offset 0, weight 1) or a predicted waypoint whose weight decays with
// lead time. Weight scales the effective distance (distance / weight), so a
// low-weight obstacle repels as if it were farther away.
struct ObstaclePoint {
  Point2 position = Point2::Zero();
  double time_offset = 0.0;  // seconds ahead of the latest observation
  double weight = 1.0;       // in (0, 1]
};

// Goal attraction: h * |q - goal| (conic well, zero exactly at the goal).
double attractive_potential(const Point2& q, const Point2& goal, double h);

// Boundary term 1 / (alpha + sum_i (g_i + |g_i|)). Negative g_i (outside)
// contribute nothing, so the value peaks at 1/alpha when every boundary is
// violated or touched.
double boundary_repulsion(const Point2& q, std::span<const HalfPlane> boundaries, double alpha);

// Weighted distance to the nearest obstacle; +inf with no obstacles.
double weighted_obstacle_distance(const Point2& q, std::span<const ObstaclePoint> obstacles);

// Obstacle term (1/(2 delta)) (1/D - 1/q_star)^2 inside the influence radius,
// zero outside. Distances clamp at 5% of q_star, which bounds the value at
// obstacle_repulsion_ceiling() instead of diverging.
double obstacle_repulsion(const Point2& q, std::span<const ObstaclePoint> obstacles,
                          double q_star, double delta);

double obstacle_repulsion_ceiling(double q_star, double delta);

// Total field: attraction + boundary + obstacle terms.
double total_potential(const Point2& q, const Point2& goal, double h,
                       std::span<const HalfPlane> boundaries, double alpha,
                       std::span<const ObstaclePoint> obstacles, double q_star, double delta);

}  // namespace ecas
