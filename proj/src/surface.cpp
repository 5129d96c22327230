#include "ecas/surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecas/errors.hpp"
#include "ecas/text_io.hpp"

namespace ecas {

namespace {

struct NamedPoint {
  Point2 position;
  std::string name;
};

std::vector<NamedPoint> coverage_entities(const Scenario& scenario,
                                          const std::vector<ObstaclePoint>& obstacles,
                                          const std::vector<std::string>& obstacle_names) {
  std::vector<NamedPoint> out;
  out.push_back({scenario.start, "start"});
  out.push_back({scenario.goal, "goal"});
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    out.push_back({obstacles[i].position, obstacle_names[i]});
  }
  return out;
}

}  // namespace

std::vector<ObstaclePoint> collect_obstacles(const Scenario& scenario,
                                             const std::vector<PredictedTrajectory>& predictions) {
  std::vector<ObstaclePoint> out;
  for (const auto& track : scenario.pedestrians) {
    if (track.frames.empty()) continue;
    out.push_back({track.last_position(), 0.0, 1.0});
  }
  const double gamma = scenario.field_params.gamma;
  for (const auto& pred : predictions) {
    double frame_interval = 0.4;
    for (const auto& track : scenario.pedestrians) {
      if (track.ped_id == pred.ped_id) {
        frame_interval = track.frame_interval;
        break;
      }
    }
    for (const auto& wp : pred.waypoints) {
      ObstaclePoint op;
      op.position = wp.position;
      op.time_offset = wp.time_offset;
      op.weight = std::pow(gamma, wp.time_offset / frame_interval);
      out.push_back(op);
    }
  }
  return out;
}

EnergySurface build_energy_surface(const Scenario& scenario,
                                   const std::vector<PredictedTrajectory>& predictions) {
  const FieldParams& fp = scenario.field_params;
  const double res = fp.grid_resolution;
  const double q_star = fp.q_star;

  const auto obstacles = collect_obstacles(scenario, predictions);
  std::vector<std::string> obstacle_names;
  obstacle_names.reserve(obstacles.size());
  {
    for (const auto& track : scenario.pedestrians) {
      if (track.frames.empty()) continue;
      obstacle_names.push_back("pedestrian " + std::to_string(track.ped_id) +
                               " latest position");
    }
    for (const auto& pred : predictions) {
      for (std::size_t k = 0; k < pred.waypoints.size(); ++k) {
        obstacle_names.push_back("pedestrian " + std::to_string(pred.ped_id) +
                                 " predicted waypoint " + std::to_string(k + 1));
      }
    }
  }
  const auto entities = coverage_entities(scenario, obstacles, obstacle_names);

  EnergySurface surface;
  surface.resolution = res;
  if (scenario.grid) {
    const GridExtent& g = *scenario.grid;
    for (const auto& e : entities) {
      if (e.position.x() - q_star < g.x_min || e.position.x() + q_star > g.x_max ||
          e.position.y() - q_star < g.y_min || e.position.y() + q_star > g.y_max) {
        throw ValidationError("grid does not cover " + e.name + " with a q_star margin");
      }
    }
    surface.origin = Point2(g.x_min, g.y_min);
    surface.width = static_cast<int>(std::ceil((g.x_max - g.x_min) / res - 1e-9));
    surface.height = static_cast<int>(std::ceil((g.y_max - g.y_min) / res - 1e-9));
  } else {
    double x_min = std::min(scenario.start.x(), scenario.goal.x());
    double x_max = std::max(scenario.start.x(), scenario.goal.x());
    double y_min = std::min(scenario.start.y(), scenario.goal.y());
    double y_max = std::max(scenario.start.y(), scenario.goal.y());
    for (const auto& obs : obstacles) {
      x_min = std::min(x_min, obs.position.x());
      x_max = std::max(x_max, obs.position.x());
      y_min = std::min(y_min, obs.position.y());
      y_max = std::max(y_max, obs.position.y());
    }
    // Two extra cells beyond the q_star margin keep all entities strictly in
    // the interpolation interior.
    const double margin = q_star + 2.0 * res;
    surface.origin = Point2(std::floor((x_min - margin) / res) * res,
                            std::floor((y_min - margin) / res) * res);
    surface.width =
        static_cast<int>(std::ceil((x_max + margin) / res) - std::floor((x_min - margin) / res));
    surface.height =
        static_cast<int>(std::ceil((y_max + margin) / res) - std::floor((y_min - margin) / res));
  }
  if (surface.width <= 0 || surface.height <= 0) {
    throw ValidationError("energy surface has empty extent");
  }

  surface.total.resize(surface.height, surface.width);
  surface.attractive.resize(surface.height, surface.width);
  surface.repulsive.resize(surface.height, surface.width);

  const std::span<const HalfPlane> boundaries(scenario.boundaries);
  const std::span<const ObstaclePoint> obs_span(obstacles);
  for (int iy = 0; iy < surface.height; ++iy) {
    for (int ix = 0; ix < surface.width; ++ix) {
      const Point2 q = surface.cell_center(ix, iy);
      const double u_att = attractive_potential(q, scenario.goal, fp.h);
      const double u_rep = boundary_repulsion(q, boundaries, fp.alpha) +
                           obstacle_repulsion(q, obs_span, q_star, fp.delta);
      surface.attractive(iy, ix) = u_att;
      surface.repulsive(iy, ix) = u_rep;
      surface.total(iy, ix) = u_att + u_rep;
    }
  }
  return surface;
}

std::string surface_to_csv(const EnergySurface& surface) {
  std::string out;
  out.reserve(static_cast<std::size_t>(surface.width) * surface.height * 48 + 64);
  out += "# energy-surface v1 " + format_double(surface.origin.x()) + " " +
         format_double(surface.origin.y()) + " " + format_double(surface.resolution) + " " +
         std::to_string(surface.width) + " " + std::to_string(surface.height) + "\n";
  out += "x,y,u_total,u_att,u_rep\n";
  for (int iy = 0; iy < surface.height; ++iy) {
    for (int ix = 0; ix < surface.width; ++ix) {
      const Point2 c = surface.cell_center(ix, iy);
      out += format_double(c.x());
      out += ',';
      out += format_double(c.y());
      out += ',';
      out += format_double(surface.total(iy, ix));
      out += ',';
      out += format_double(surface.attractive(iy, ix));
      out += ',';
      out += format_double(surface.repulsive(iy, ix));
      out += '\n';
    }
  }
  return out;
}

EnergySurface surface_from_csv(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line)) throw ParseError("surface CSV is empty");

  EnergySurface surface;
  {
    std::istringstream head(line);
    std::string hash, tag, version;
    double ox = 0.0, oy = 0.0, res = 0.0;
    int w = 0, h = 0;
    if (!(head >> hash >> tag >> version >> ox >> oy >> res >> w >> h) || hash != "#" ||
        tag != "energy-surface" || version != "v1") {
      throw ParseError("surface CSV missing `# energy-surface v1 ...` geometry line");
    }
    if (res <= 0.0 || w <= 0 || h <= 0) throw ParseError("surface CSV has invalid geometry");
    surface.origin = Point2(ox, oy);
    surface.resolution = res;
    surface.width = w;
    surface.height = h;
  }
  if (!std::getline(lines, line) || line.rfind("x,y,u_total", 0) != 0) {
    throw ParseError("surface CSV missing column header");
  }

  surface.total.resize(surface.height, surface.width);
  surface.attractive.resize(surface.height, surface.width);
  surface.repulsive.resize(surface.height, surface.width);

  const std::size_t expected =
      static_cast<std::size_t>(surface.width) * static_cast<std::size_t>(surface.height);
  std::size_t count = 0;
  int line_no = 2;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double vals[5];
    for (int i = 0; i < 5; ++i) {
      std::string field;
      if (!std::getline(row, field, i == 4 ? '\n' : ',')) {
        throw ParseError("surface CSV line " + std::to_string(line_no) + ": expected 5 fields");
      }
      try {
        vals[i] = std::stod(field);
      } catch (const std::exception&) {
        throw ParseError("surface CSV line " + std::to_string(line_no) + ": bad number `" +
                         field + "`");
      }
    }
    if (count >= expected) throw ParseError("surface CSV has more rows than width*height");
    const int ix = static_cast<int>(count % static_cast<std::size_t>(surface.width));
    const int iy = static_cast<int>(count / static_cast<std::size_t>(surface.width));
    surface.total(iy, ix) = vals[2];
    surface.attractive(iy, ix) = vals[3];
    surface.repulsive(iy, ix) = vals[4];
    ++count;
  }
  if (count != expected) {
    throw ParseError("surface CSV has " + std::to_string(count) + " rows, expected " +
                     std::to_string(expected));
  }
  return surface;
}

void write_surface_csv(const EnergySurface& surface, const std::string& path) {
  write_text_file(path, surface_to_csv(surface));
}

EnergySurface read_surface_csv(const std::string& path) {
  return surface_from_csv(read_text_file(path));
}

}  // namespace ecas
