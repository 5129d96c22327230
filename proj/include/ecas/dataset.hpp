#pragma once

#include <string>
#include <vector>

#include "ecas/scenario.hpp"

namespace ecas {

struct DatasetLoadResult {
  std::vector<PedestrianTrack> tracks;
  int dropped_short_tracks = 0;  // tracks with fewer than 2 frames
};

// Loads a plain-text trajectory dataset: one whitespace-separated record
// `frame_id ped_id x y` per line, '#' comment lines ignored. Records are
// grouped by pedestrian and sorted by frame. One record counts as one step
// of `frame_interval` seconds regardless of raw frame-id gaps.
DatasetLoadResult load_trajectory_dataset(const std::string& text,
                                          double frame_interval = 0.4);

DatasetLoadResult load_trajectory_dataset_file(const std::string& path,
                                               double frame_interval = 0.4);

struct ObsPredSplit {
  bool ok = false;
  std::string skip_reason;
  PedestrianTrack history;
  PedestrianTrack ground_truth;
};

// Partitions the first obs_len + pred_len frames of a track into an observed
// history and a ground-truth future. Tracks that are too short or unevenly
// spaced are skipped with a reason rather than padded.
ObsPredSplit split_obs_pred(const PedestrianTrack& track, int obs_len, int pred_len);

}  // namespace ecas
