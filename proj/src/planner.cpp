#include "ecas/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ecas/errors.hpp"
#include "ecas/text_io.hpp"

namespace ecas {

namespace {
constexpr double kZeroGradient = 1e-12;
constexpr double kPerturbUphillFactor = 2.0;
constexpr int kPerturbMaxAttempts = 100;
}  // namespace

double surface_value(const EnergySurface& surface, const Point2& q) {
  const double u = (q.x() - surface.origin.x()) / surface.resolution - 0.5;
  const double v = (q.y() - surface.origin.y()) / surface.resolution - 0.5;
  if (u < 0.0 || u > surface.width - 1 || v < 0.0 || v > surface.height - 1) {
    throw std::out_of_range("surface query outside the cell-center hull");
  }
  int ix0 = static_cast<int>(std::floor(u));
  int iy0 = static_cast<int>(std::floor(v));
  ix0 = std::min(ix0, surface.width - 2);
  iy0 = std::min(iy0, surface.height - 2);
  const double fx = u - ix0;
  const double fy = v - iy0;
  return (1.0 - fx) * (1.0 - fy) * surface.total(iy0, ix0) +
         fx * (1.0 - fy) * surface.total(iy0, ix0 + 1) +
         (1.0 - fx) * fy * surface.total(iy0 + 1, ix0) +
         fx * fy * surface.total(iy0 + 1, ix0 + 1);
}

GradientSample surface_gradient(const EnergySurface& surface, const Point2& q) {
  if (!surface.interior(q)) {
    throw std::out_of_range("gradient query outside the surface interior");
  }
  const double step = 0.5 * surface.resolution;
  GradientSample g;
  g.gx = (surface_value(surface, q + Point2(step, 0.0)) -
          surface_value(surface, q - Point2(step, 0.0))) /
         (2.0 * step);
  g.gy = (surface_value(surface, q + Point2(0.0, step)) -
          surface_value(surface, q - Point2(0.0, step))) /
         (2.0 * step);
  if (!std::isfinite(g.gx) || !std::isfinite(g.gy)) {
    throw std::runtime_error("non-finite surface gradient");
  }
  return g;
}

bool detect_local_minimum(std::span<const RouteWaypoint> recent, const PlannerParams& params,
                          const Point2& goal) {
  if (recent.size() < static_cast<std::size_t>(params.stall_window)) return false;
  if ((recent.back().position - goal).norm() < params.goal_tolerance) return false;
  double diameter = 0.0;
  for (std::size_t i = 0; i < recent.size(); ++i) {
    for (std::size_t j = i + 1; j < recent.size(); ++j) {
      diameter = std::max(diameter, (recent[i].position - recent[j].position).norm());
    }
  }
  return diameter < params.stall_epsilon;
}

Point2 perturb(const Point2& q, SeededRng& rng, double perturb_radius,
               const EnergySurface& surface) {
  if (perturb_radius == 0.0) return q;
  const double ceiling = kPerturbUphillFactor * surface_value(surface, q);
  for (int attempt = 0; attempt < kPerturbMaxAttempts; ++attempt) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double radius = rng.uniform(0.0, perturb_radius);
    const Point2 candidate = q + radius * Point2(std::cos(angle), std::sin(angle));
    if (!surface.interior(candidate)) continue;
    if (surface_value(surface, candidate) <= ceiling) return candidate;
  }
  throw std::runtime_error("perturbation failed: no acceptable candidate in 100 draws");
}

PlannedRoute plan(const EnergySurface& surface, const PlannerParams& params, const Point2& start,
                  const Point2& goal) {
  if (!surface.interior(start)) throw ValidationError("start lies outside the surface interior");
  if (!surface.interior(goal)) throw ValidationError("goal lies outside the surface interior");

  SeededRng rng(params.rng_seed);
  PlannedRoute route;
  route.waypoints.push_back({start, 0, false, surface_value(surface, start)});
  Point2 q = start;
  if ((q - goal).norm() < params.goal_tolerance) {
    route.termination = Termination::GoalReached;
    return route;
  }

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    const std::size_t window = std::min(route.waypoints.size(),
                                        static_cast<std::size_t>(params.stall_window));
    const std::span<const RouteWaypoint> recent(route.waypoints.data() +
                                                    (route.waypoints.size() - window),
                                                window);
    bool perturbed = false;
    Point2 next;
    if (detect_local_minimum(recent, params, goal)) {
      next = perturb(q, rng, params.perturb_radius, surface);
      perturbed = true;
    } else {
      const GradientSample g = surface_gradient(surface, q);
      const double norm = std::hypot(g.gx, g.gy);
      if (norm < kZeroGradient) {
        // Flat spot away from the goal counts as a stall.
        next = perturb(q, rng, params.perturb_radius, surface);
        perturbed = true;
      } else {
        next = q + params.step_cap * Point2(-g.gx / norm, -g.gy / norm);
        if (!surface.interior(next)) {
          // A full descent step would leave the grid; take a random move
          // instead so every recorded descent step is a pure gradient step.
          next = perturb(q, rng, params.perturb_radius, surface);
          perturbed = true;
        }
      }
    }
    q = next;
    route.waypoints.push_back({q, iter, perturbed, surface_value(surface, q)});
    if ((q - goal).norm() < params.goal_tolerance) {
      route.termination = Termination::GoalReached;
      return route;
    }
  }
  route.termination = Termination::MaxIterations;
  return route;
}

double route_clearance(const PlannedRoute& route,
                       const std::vector<PredictedTrajectory>& predictions,
                       const std::vector<PedestrianTrack>& observed) {
  std::vector<Point2> points;
  for (const auto& track : observed) {
    if (!track.frames.empty()) points.push_back(track.last_position());
  }
  for (const auto& pred : predictions) {
    for (const auto& wp : pred.waypoints) points.push_back(wp.position);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& wp : route.waypoints) {
    for (const auto& p : points) {
      best = std::min(best, (wp.position - p).norm());
    }
  }
  return best;
}

std::string route_to_csv(const PlannedRoute& route) {
  std::string out = "step,x,y,perturbed,potential\n";
  for (const auto& wp : route.waypoints) {
    out += std::to_string(wp.step_index);
    out += ',';
    out += format_double(wp.position.x());
    out += ',';
    out += format_double(wp.position.y());
    out += ',';
    out += wp.perturbed ? '1' : '0';
    out += ',';
    out += format_double(wp.potential);
    out += '\n';
  }
  out += std::string("# termination: ") +
         (route.termination == Termination::GoalReached ? "GoalReached" : "MaxIterations") + "\n";
  return out;
}

PlannedRoute route_from_csv(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line) || line.rfind("step,x,y", 0) != 0) {
    throw ParseError("route CSV missing header");
  }
  PlannedRoute route;
  bool saw_termination = false;
  int line_no = 1;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("GoalReached") != std::string::npos) {
        route.termination = Termination::GoalReached;
        saw_termination = true;
      } else if (line.find("MaxIterations") != std::string::npos) {
        route.termination = Termination::MaxIterations;
        saw_termination = true;
      }
      continue;
    }
    std::istringstream row(line);
    std::string fields[5];
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(row, fields[i], i == 4 ? '\n' : ',')) {
        throw ParseError("route CSV line " + std::to_string(line_no) + ": expected 5 fields");
      }
    }
    try {
      RouteWaypoint wp;
      wp.step_index = std::stoi(fields[0]);
      wp.position = Point2(std::stod(fields[1]), std::stod(fields[2]));
      wp.perturbed = std::stoi(fields[3]) != 0;
      wp.potential = std::stod(fields[4]);
      route.waypoints.push_back(wp);
    } catch (const std::exception&) {
      throw ParseError("route CSV line " + std::to_string(line_no) + ": bad field");
    }
  }
  if (!saw_termination) throw ParseError("route CSV missing `# termination:` line");
  return route;
}

void write_route_csv(const PlannedRoute& route, const std::string& path) {
  write_text_file(path, route_to_csv(route));
}

PlannedRoute read_route_csv(const std::string& path) {
  return route_from_csv(read_text_file(path));
}

}  // namespace ecas
