#pragma once

#include "ecas/prediction.hpp"
#include "ecas/scenario.hpp"

namespace ecas {

// Mean Euclidean distance between predicted and true positions over all
// prediction steps. Requires equal lengths.
double mad(const PredictedTrajectory& pred, const PedestrianTrack& truth);

// Euclidean distance at the final predicted point.
double fad(const PredictedTrajectory& pred, const PedestrianTrack& truth);

}  // namespace ecas
