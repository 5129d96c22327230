#include "ecas/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ecas/errors.hpp"

namespace ecas {

DatasetLoadResult load_trajectory_dataset(const std::string& text, double frame_interval) {
  if (!(frame_interval > 0.0)) throw ValidationError("frame_interval must be positive");

  std::map<int, PedestrianTrack> by_id;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream row(line);
    double frame_raw = 0.0, ped_raw = 0.0, x = 0.0, y = 0.0;
    if (!(row >> frame_raw >> ped_raw >> x >> y)) {
      throw ParseError("dataset line " + std::to_string(line_no) +
                       ": expected `frame_id ped_id x y`");
    }
    std::string trailing;
    if (row >> trailing) {
      throw ParseError("dataset line " + std::to_string(line_no) + ": trailing field `" +
                       trailing + "`");
    }
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw ParseError("dataset line " + std::to_string(line_no) + ": non-finite position");
    }

    const int ped_id = static_cast<int>(std::llround(ped_raw));
    auto& track = by_id[ped_id];
    track.ped_id = ped_id;
    track.frame_interval = frame_interval;
    track.frames.push_back({static_cast<std::int64_t>(std::llround(frame_raw)), Point2(x, y)});
  }

  DatasetLoadResult result;
  for (auto& [id, track] : by_id) {
    std::sort(track.frames.begin(), track.frames.end(),
              [](const TrackPoint& a, const TrackPoint& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < track.frames.size(); ++i) {
      if (track.frames[i].frame == track.frames[i - 1].frame) {
        throw ParseError("pedestrian " + std::to_string(id) + " has duplicate frame " +
                         std::to_string(track.frames[i].frame));
      }
    }
    if (track.frames.size() < 2) {
      ++result.dropped_short_tracks;
      continue;
    }
    result.tracks.push_back(std::move(track));
  }
  return result;
}

DatasetLoadResult load_trajectory_dataset_file(const std::string& path, double frame_interval) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_trajectory_dataset(buf.str(), frame_interval);
}

ObsPredSplit split_obs_pred(const PedestrianTrack& track, int obs_len, int pred_len) {
  ObsPredSplit out;
  if (obs_len < 2 || pred_len < 1) {
    out.skip_reason = "obs_len must be >= 2 and pred_len >= 1";
    return out;
  }
  const std::size_t need = static_cast<std::size_t>(obs_len) + static_cast<std::size_t>(pred_len);
  if (track.frames.size() < need) {
    out.skip_reason = "track " + std::to_string(track.ped_id) + " has " +
                      std::to_string(track.frames.size()) + " frames, needs " +
                      std::to_string(need);
    return out;
  }
  const std::int64_t spacing = track.frames[1].frame - track.frames[0].frame;
  for (std::size_t i = 1; i < need; ++i) {
    if (track.frames[i].frame - track.frames[i - 1].frame != spacing) {
      out.skip_reason = "track " + std::to_string(track.ped_id) + " has non-uniform frame spacing";
      return out;
    }
  }

  out.ok = true;
  out.history.ped_id = track.ped_id;
  out.history.frame_interval = track.frame_interval;
  out.history.frames.assign(track.frames.begin(), track.frames.begin() + obs_len);
  out.ground_truth.ped_id = track.ped_id;
  out.ground_truth.frame_interval = track.frame_interval;
  out.ground_truth.frames.assign(track.frames.begin() + obs_len,
                                 track.frames.begin() + static_cast<std::ptrdiff_t>(need));
  return out;
}

}  // namespace ecas
