#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ecas/potential.hpp"
#include "ecas/prediction.hpp"
#include "ecas/scenario.hpp"

namespace ecas {

// Rasterized total potential over the riding environment. Values are sampled
// at cell centers; origin is the lower-left corner of the grid. Entry (iy, ix)
// covers the cell whose center is origin + ((ix+0.5) res, (iy+0.5) res).
// The total grid equals attractive + repulsive exactly, cell by cell.
struct EnergySurface {
  Point2 origin = Point2::Zero();
  double resolution = 0.25;
  int width = 0;
  int height = 0;
  Eigen::MatrixXd total;       // height x width
  Eigen::MatrixXd attractive;  // goal attraction component
  Eigen::MatrixXd repulsive;   // boundary + obstacle components

  Point2 cell_center(int ix, int iy) const {
    return origin + Point2((ix + 0.5) * resolution, (iy + 0.5) * resolution);
  }

  Point2 max_corner() const {
    return origin + Point2(width * resolution, height * resolution);
  }

  // True when q keeps at least `margin_cells` cells of clearance from every
  // grid edge. The planner needs one cell of margin to interpolate gradients.
  bool interior(const Point2& q, double margin_cells = 1.0) const {
    const double m = margin_cells * resolution;
    const Point2 hi = max_corner();
    return q.x() >= origin.x() + m && q.x() <= hi.x() - m && q.y() >= origin.y() + m &&
           q.y() <= hi.y() - m;
  }
};

// Flattens scenario pedestrians and their predictions into obstacle samples:
// each latest observed position at full weight, each predicted waypoint at
// weight gamma^k for the k-th step ahead.
std::vector<ObstaclePoint> collect_obstacles(const Scenario& scenario,
                                             const std::vector<PredictedTrajectory>& predictions);

// Rasterizes the total potential of a scenario onto a grid. Uses the
// scenario's explicit grid extent when present (rejecting grids that do not
// cover start, goal, and every obstacle with a q_star margin), otherwise
// auto-sizes around the content with the same margin.
EnergySurface build_energy_surface(const Scenario& scenario,
                                   const std::vector<PredictedTrajectory>& predictions);

// CSV export: a `# energy-surface ...` geometry line, a `x,y,u_total,u_att,u_rep`
// header, then one row per cell (bottom row first). Values round-trip exactly.
std::string surface_to_csv(const EnergySurface& surface);
EnergySurface surface_from_csv(const std::string& text);

void write_surface_csv(const EnergySurface& surface, const std::string& path);
EnergySurface read_surface_csv(const std::string& path);

}  // namespace ecas
