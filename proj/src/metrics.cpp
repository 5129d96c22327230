#include "ecas/metrics.hpp"

#include <stdexcept>

namespace ecas {

namespace {
void check_lengths(const PredictedTrajectory& pred, const PedestrianTrack& truth) {
  if (pred.waypoints.empty()) throw std::invalid_argument("empty prediction");
  if (pred.waypoints.size() != truth.frames.size()) {
    throw std::invalid_argument("prediction and ground truth lengths differ: " +
                                std::to_string(pred.waypoints.size()) + " vs " +
                                std::to_string(truth.frames.size()));
  }
}
}  // namespace

double mad(const PredictedTrajectory& pred, const PedestrianTrack& truth) {
  check_lengths(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.waypoints.size(); ++i) {
    sum += (pred.waypoints[i].position - truth.frames[i].position).norm();
  }
  return sum / static_cast<double>(pred.waypoints.size());
}

double fad(const PredictedTrajectory& pred, const PedestrianTrack& truth) {
  check_lengths(pred, truth);
  return (pred.waypoints.back().position - truth.frames.back().position).norm();
}

}  // namespace ecas
