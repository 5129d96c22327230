#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecas/planner.hpp"
#include "ecas/prediction.hpp"
#include "ecas/surface.hpp"

namespace ecas {

enum class ColorScale { Linear, Log };

// Repulsion near obstacles dwarfs the rest of the field, so the log scale is
// the default; linear is available for flat surfaces.
struct RenderSpec {
  ColorScale color_scale = ColorScale::Log;
  std::optional<double> value_clip;
  std::optional<Point2> start;  // red marker
  std::optional<Point2> goal;   // green marker
};

// Continuous world -> image transform: one image unit per cell, y flipped so
// row 0 is the top of the map. Cell centers land on pixel centers.
Eigen::Vector2d world_to_image(const EnergySurface& surface, const Point2& q);
Point2 image_to_world(const EnergySurface& surface, const Eigen::Vector2d& uv);

struct SurfaceImages {
  std::string pgm;        // P2 ASCII graymap, brighter = higher potential
  std::string svg;
  bool degenerate = false;  // constant surface rendered as a uniform image
};

SurfaceImages export_surface(const EnergySurface& surface, const RenderSpec& spec);

// SVG of the heatmap with the route, start/goal markers, perturbed waypoints
// highlighted, and pedestrian polylines (observed solid, predicted dashed).
// Throws if any route waypoint lies outside the grid.
std::string overlay_route(const EnergySurface& surface, const PlannedRoute& route,
                          const std::vector<PredictedTrajectory>& predictions,
                          const std::vector<PedestrianTrack>& observed, const RenderSpec& spec);

// Prediction artifact CSV: `ped_id,kind,step,t_offset,x,y` with kind obs|pred.
// Observed rows carry non-positive steps counting back from the last frame.
struct PredictionArtifact {
  std::vector<PedestrianTrack> observed;
  std::vector<PredictedTrajectory> predicted;
};

std::string predictions_to_csv(const PredictionArtifact& artifact);
PredictionArtifact predictions_from_csv(const std::string& text);

}  // namespace ecas
