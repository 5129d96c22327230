#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecas/geometry.hpp"

namespace ecas {

struct TrackPoint {
  std::int64_t frame = 0;
  Point2 position = Point2::Zero();
};

// Time-stamped positions of one pedestrian at a fixed interval between
// consecutive entries. Frame indices are strictly increasing but need not be
// contiguous (ETH/UCY style ids count raw video frames).
struct PedestrianTrack {
  int ped_id = 0;
  double frame_interval = 0.4;  // seconds between consecutive entries
  std::vector<TrackPoint> frames;

  std::size_t size() const { return frames.size(); }
  const Point2& last_position() const { return frames.back().position; }
};

struct FieldParams {
  double h = 1.0;                // attraction strength
  double alpha = 0.1;            // boundary denominator constant
  double q_star = 2.0;           // obstacle influence radius, meters
  double delta = 1.0;            // obstacle repulsion scale
  double grid_resolution = 0.25; // meters per cell
  double gamma = 0.9;            // per-frame weight decay for predicted obstacles
};

struct PlannerParams {
  int max_iterations = 300;
  double step_cap = 1.0;        // meters, <= 1.0
  double goal_tolerance = 2.0;  // meters
  int stall_window = 10;
  double stall_epsilon = 0.25;  // meters
  double perturb_radius = 1.0;  // meters
  std::uint64_t rng_seed = 0;
};

// Optional explicit grid extent in world coordinates. When absent the energy
// surface auto-sizes around the scenario content.
struct GridExtent {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

struct Scenario {
  std::string name;
  std::vector<HalfPlane> boundaries;  // convex drivable region, g_i(q) >= 0 inside
  Point2 start = Point2::Zero();
  Point2 goal = Point2::Zero();
  std::vector<PedestrianTrack> pedestrians;
  FieldParams field_params;
  PlannerParams planner_params;
  std::optional<GridExtent> grid;

  bool inside_drivable_region(const Point2& q) const {
    for (const auto& hp : boundaries) {
      if (hp.evaluate(q) <= 0.0) return false;
    }
    return true;
  }
};

// Parses a scenario document (JSON). Throws ParseError for malformed text
// (position-annotated) and ValidationError for invariant violations such as
// a non-positive field parameter or a start point outside the region.
Scenario parse_scenario(const std::string& text);

// Inverse of parse_scenario up to structural equality.
std::string serialize_scenario(const Scenario& scenario);

Scenario load_scenario_file(const std::string& path);

}  // namespace ecas
