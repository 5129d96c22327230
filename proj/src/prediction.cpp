#include "ecas/prediction.hpp"

#include <stdexcept>

namespace ecas {

PredictedTrajectory predict_constant_velocity(const PedestrianTrack& history, int pred_len) {
  if (history.frames.size() < 2) {
    throw std::invalid_argument("constant-velocity prediction needs at least 2 observed frames");
  }
  if (pred_len < 1) throw std::invalid_argument("pred_len must be positive");

  const Point2& last = history.frames.back().position;
  const Point2& prev = history.frames[history.frames.size() - 2].position;
  const Point2 step = last - prev;  // displacement per frame interval

  PredictedTrajectory out;
  out.ped_id = history.ped_id;
  out.waypoints.reserve(static_cast<std::size_t>(pred_len));
  for (int k = 1; k <= pred_len; ++k) {
    PredictedWaypoint wp;
    wp.time_offset = k * history.frame_interval;
    wp.position = last + k * step;
    out.waypoints.push_back(wp);
  }
  return out;
}

double average_speed(const PedestrianTrack& track) {
  if (track.frames.size() < 2) return 0.0;
  double path = 0.0;
  for (std::size_t i = 1; i < track.frames.size(); ++i) {
    path += (track.frames[i].position - track.frames[i - 1].position).norm();
  }
  const double elapsed = (track.frames.size() - 1) * track.frame_interval;
  return path / elapsed;
}

}  // namespace ecas
