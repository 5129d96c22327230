#include "ecas/render.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ecas/errors.hpp"
#include "ecas/text_io.hpp"

namespace ecas {

namespace {

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::string(buf);
}

// Normalized [0,1] intensity per cell after clipping and scale choice.
Eigen::MatrixXd intensity_map(const EnergySurface& surface, const RenderSpec& spec,
                              bool* degenerate) {
  Eigen::MatrixXd v = surface.total;
  if (spec.value_clip) {
    v = v.cwiseMin(*spec.value_clip);
  }
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  *degenerate = !(hi - lo > 0.0);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  if (*degenerate) return t;
  if (spec.color_scale == ColorScale::Linear) {
    t = (v.array() - lo) / (hi - lo);
  } else {
    const double denom = std::log1p(hi - lo);
    t = (v.array() - lo).log1p() / denom;
  }
  return t;
}

void append_heatmap_rects(std::string& svg, const EnergySurface& surface,
                          const Eigen::MatrixXd& t) {
  for (int iy = surface.height - 1; iy >= 0; --iy) {
    const int row = surface.height - 1 - iy;
    for (int ix = 0; ix < surface.width; ++ix) {
      const double ti = t(iy, ix);
      const int r = static_cast<int>(std::lround(255.0 * ti));
      const int g = static_cast<int>(std::lround(220.0 * ti));
      const int b = static_cast<int>(std::lround(255.0 * (1.0 - ti) * 0.6 + 40.0));
      svg += "<rect x=\"" + std::to_string(ix) + "\" y=\"" + std::to_string(row) +
             "\" width=\"1\" height=\"1\" fill=\"rgb(" + std::to_string(r) + "," +
             std::to_string(g) + "," + std::to_string(b) + ")\"/>\n";
    }
  }
}

std::string svg_open(const EnergySurface& surface) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         std::to_string(surface.width) + " " + std::to_string(surface.height) +
         "\" width=\"" + std::to_string(surface.width * 8) + "\" height=\"" +
         std::to_string(surface.height * 8) + "\">\n";
}

void append_marker(std::string& svg, const EnergySurface& surface, const Point2& world,
                   const char* fill, double radius) {
  const Eigen::Vector2d uv = world_to_image(surface, world);
  svg += "<circle cx=\"" + fmt6(uv.x()) + "\" cy=\"" + fmt6(uv.y()) + "\" r=\"" +
         fmt6(radius) + "\" fill=\"" + fill + "\"/>\n";
}

void append_polyline(std::string& svg, const EnergySurface& surface,
                     const std::vector<Point2>& points, const char* stroke, double width,
                     bool dashed) {
  if (points.size() < 2) return;
  svg += "<polyline fill=\"none\" stroke=\"";
  svg += stroke;
  svg += "\" stroke-width=\"" + fmt6(width) + "\"";
  if (dashed) svg += " stroke-dasharray=\"0.6 0.4\"";
  svg += " points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector2d uv = world_to_image(surface, points[i]);
    if (i) svg += ' ';
    svg += fmt6(uv.x()) + "," + fmt6(uv.y());
  }
  svg += "\"/>\n";
}

}  // namespace

Eigen::Vector2d world_to_image(const EnergySurface& surface, const Point2& q) {
  const double u = (q.x() - surface.origin.x()) / surface.resolution;
  const double v = surface.height - (q.y() - surface.origin.y()) / surface.resolution;
  return {u, v};
}

Point2 image_to_world(const EnergySurface& surface, const Eigen::Vector2d& uv) {
  return {surface.origin.x() + uv.x() * surface.resolution,
          surface.origin.y() + (surface.height - uv.y()) * surface.resolution};
}

SurfaceImages export_surface(const EnergySurface& surface, const RenderSpec& spec) {
  if (surface.width <= 0 || surface.height <= 0) {
    throw ValidationError("cannot render an empty surface");
  }
  SurfaceImages out;
  const Eigen::MatrixXd t = intensity_map(surface, spec, &out.degenerate);

  std::string pgm = "P2\n" + std::to_string(surface.width) + " " +
                    std::to_string(surface.height) + "\n255\n";
  for (int iy = surface.height - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < surface.width; ++ix) {
      if (ix) pgm += ' ';
      pgm += std::to_string(static_cast<int>(std::lround(255.0 * t(iy, ix))));
    }
    pgm += '\n';
  }
  out.pgm = std::move(pgm);

  std::string svg = svg_open(surface);
  append_heatmap_rects(svg, surface, t);
  if (spec.start) append_marker(svg, surface, *spec.start, "#d62728", 0.45);
  if (spec.goal) append_marker(svg, surface, *spec.goal, "#2ca02c", 0.45);
  svg += "</svg>\n";
  out.svg = std::move(svg);
  return out;
}

std::string overlay_route(const EnergySurface& surface, const PlannedRoute& route,
                          const std::vector<PredictedTrajectory>& predictions,
                          const std::vector<PedestrianTrack>& observed, const RenderSpec& spec) {
  for (const auto& wp : route.waypoints) {
    if (!surface.interior(wp.position, 0.0)) {
      throw std::out_of_range("route waypoint outside the surface grid");
    }
  }
  bool degenerate = false;
  const Eigen::MatrixXd t = intensity_map(surface, spec, &degenerate);

  std::string svg = svg_open(surface);
  append_heatmap_rects(svg, surface, t);

  for (const auto& track : observed) {
    std::vector<Point2> pts;
    for (const auto& tp : track.frames) pts.push_back(tp.position);
    append_polyline(svg, surface, pts, "#444444", 0.12, false);
  }
  for (const auto& pred : predictions) {
    std::vector<Point2> pts;
    for (const auto& wp : pred.waypoints) pts.push_back(wp.position);
    append_polyline(svg, surface, pts, "#b02ab0", 0.12, true);
  }

  std::vector<Point2> route_pts;
  for (const auto& wp : route.waypoints) route_pts.push_back(wp.position);
  append_polyline(svg, surface, route_pts, "#1f77d0", 0.18, false);
  for (const auto& wp : route.waypoints) {
    if (wp.perturbed) append_marker(svg, surface, wp.position, "#ffd700", 0.3);
  }

  if (spec.start) append_marker(svg, surface, *spec.start, "#d62728", 0.45);
  if (spec.goal) append_marker(svg, surface, *spec.goal, "#2ca02c", 0.45);
  svg += "</svg>\n";
  return svg;
}

std::string predictions_to_csv(const PredictionArtifact& artifact) {
  std::string out = "ped_id,kind,step,t_offset,x,y\n";
  for (const auto& track : artifact.observed) {
    const int n = static_cast<int>(track.frames.size());
    for (int i = 0; i < n; ++i) {
      const int step = i - (n - 1);  // last observed frame is step 0
      out += std::to_string(track.ped_id) + ",obs," + std::to_string(step) + "," +
             format_double(step * track.frame_interval) + "," +
             format_double(track.frames[static_cast<std::size_t>(i)].position.x()) + "," +
             format_double(track.frames[static_cast<std::size_t>(i)].position.y()) + "\n";
    }
  }
  for (const auto& pred : artifact.predicted) {
    int step = 1;
    for (const auto& wp : pred.waypoints) {
      out += std::to_string(pred.ped_id) + ",pred," + std::to_string(step++) + "," +
             format_double(wp.time_offset) + "," + format_double(wp.position.x()) + "," +
             format_double(wp.position.y()) + "\n";
    }
  }
  return out;
}

PredictionArtifact predictions_from_csv(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line) || line.rfind("ped_id,kind,step", 0) != 0) {
    throw ParseError("predictions CSV missing header");
  }
  PredictionArtifact out;
  int line_no = 1;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string fields[6];
    for (int i = 0; i < 6; ++i) {
      if (!std::getline(row, fields[i], i == 5 ? '\n' : ',')) {
        throw ParseError("predictions CSV line " + std::to_string(line_no) +
                         ": expected 6 fields");
      }
    }
    try {
      const int ped_id = std::stoi(fields[0]);
      const int step = std::stoi(fields[2]);
      const double t_offset = std::stod(fields[3]);
      const Point2 pos(std::stod(fields[4]), std::stod(fields[5]));
      if (fields[1] == "obs") {
        auto it = std::find_if(out.observed.begin(), out.observed.end(),
                               [&](const PedestrianTrack& t) { return t.ped_id == ped_id; });
        if (it == out.observed.end()) {
          PedestrianTrack track;
          track.ped_id = ped_id;
          out.observed.push_back(track);
          it = out.observed.end() - 1;
        }
        it->frames.push_back({step, pos});
      } else if (fields[1] == "pred") {
        auto it = std::find_if(out.predicted.begin(), out.predicted.end(),
                               [&](const PredictedTrajectory& t) { return t.ped_id == ped_id; });
        if (it == out.predicted.end()) {
          PredictedTrajectory pred;
          pred.ped_id = ped_id;
          out.predicted.push_back(pred);
          it = out.predicted.end() - 1;
        }
        it->waypoints.push_back({t_offset, pos});
      } else {
        throw ParseError("predictions CSV line " + std::to_string(line_no) + ": unknown kind `" +
                         fields[1] + "`");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("predictions CSV line " + std::to_string(line_no) + ": bad field");
    }
  }
  return out;
}

}  // namespace ecas
