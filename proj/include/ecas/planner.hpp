#pragma once

#include <span>
#include <string>
#include <vector>

#include "ecas/prediction.hpp"
#include "ecas/rng.hpp"
#include "ecas/scenario.hpp"
#include "ecas/surface.hpp"

namespace ecas {

struct GradientSample {
  double gx = 0.0;  // energy per meter
  double gy = 0.0;
};

enum class Termination { GoalReached, MaxIterations };

struct RouteWaypoint {
  Point2 position = Point2::Zero();
  int step_index = 0;
  bool perturbed = false;
  double potential = 0.0;
};

struct PlannedRoute {
  std::vector<RouteWaypoint> waypoints;
  Termination termination = Termination::MaxIterations;

  int perturbed_count() const {
    int n = 0;
    for (const auto& wp : waypoints) n += wp.perturbed ? 1 : 0;
    return n;
  }

  double path_length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      len += (waypoints[i].position - waypoints[i - 1].position).norm();
    }
    return len;
  }
};

// Bilinear interpolation of the total grid at q. q must lie within the hull
// of cell centers (surface.interior(q, 0.5) is sufficient).
double surface_value(const EnergySurface& surface, const Point2& q);

// Central differences of the interpolated surface with a half-cell step.
// At cell centers this reproduces the one-cell central difference of the
// underlying samples exactly. Requires one cell of interior margin.
GradientSample surface_gradient(const EnergySurface& surface, const Point2& q);

// True when the last `stall_window` waypoints fit inside a ball of diameter
// `stall_epsilon` while the goal is still out of tolerance. Windows shorter
// than stall_window never report a stall.
bool detect_local_minimum(std::span<const RouteWaypoint> recent, const PlannerParams& params,
                          const Point2& goal);

// Random escape move: samples directions and radii up to perturb_radius until
// a candidate lies in the grid interior and costs at most twice the current
// potential. Throws after 100 rejected candidates.
Point2 perturb(const Point2& q, SeededRng& rng, double perturb_radius,
               const EnergySurface& surface);

// Normalized gradient descent over the surface: fixed step_cap moves along
// the negative interpolated gradient, perturbation on stalls, terminating at
// goal_tolerance or max_iterations.
PlannedRoute plan(const EnergySurface& surface, const PlannerParams& params, const Point2& start,
                  const Point2& goal);

// Minimum distance from any route waypoint to any observed latest position or
// predicted waypoint; +infinity when there are no obstacle points.
double route_clearance(const PlannedRoute& route,
                       const std::vector<PredictedTrajectory>& predictions,
                       const std::vector<PedestrianTrack>& observed);

// Route CSV: `step,x,y,perturbed,potential` rows plus a trailing
// `# termination: ...` comment.
std::string route_to_csv(const PlannedRoute& route);
PlannedRoute route_from_csv(const std::string& text);

void write_route_csv(const PlannedRoute& route, const std::string& path);
PlannedRoute read_route_csv(const std::string& path);

}  // namespace ecas
