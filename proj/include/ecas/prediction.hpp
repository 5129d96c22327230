#pragma once

#include <vector>

#include "ecas/scenario.hpp"

namespace ecas {

struct PredictedWaypoint {
  double time_offset = 0.0;  // seconds after the last observed frame
  Point2 position = Point2::Zero();
};

struct PredictedTrajectory {
  int ped_id = 0;
  std::vector<PredictedWaypoint> waypoints;
};

// Extrapolates the velocity between the last two observed frames linearly for
// pred_len steps of one frame interval each. Requires >= 2 frames.
PredictedTrajectory predict_constant_velocity(const PedestrianTrack& history, int pred_len);

// Mean observed speed of a track in m/s (path length / elapsed time).
double average_speed(const PedestrianTrack& track);

}  // namespace ecas
