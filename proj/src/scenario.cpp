#include "ecas/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "ecas/errors.hpp"

namespace ecas {

using nlohmann::json;

namespace {

double require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be positive");
  }
  return v;
}

Point2 parse_point(const json& j, const char* name) {
  if (!j.is_object() || !j.contains("x") || !j.contains("y")) {
    throw ValidationError(std::string(name) + " must be an object with x and y");
  }
  Point2 p(j.at("x").get<double>(), j.at("y").get<double>());
  if (!is_finite(p)) {
    throw ValidationError(std::string(name) + " coordinates must be finite");
  }
  return p;
}

FieldParams parse_field_params(const json& j) {
  FieldParams fp;
  if (j.contains("h")) fp.h = j.at("h").get<double>();
  if (j.contains("alpha")) fp.alpha = j.at("alpha").get<double>();
  if (j.contains("q_star")) fp.q_star = j.at("q_star").get<double>();
  if (j.contains("delta")) fp.delta = j.at("delta").get<double>();
  if (j.contains("grid_resolution")) fp.grid_resolution = j.at("grid_resolution").get<double>();
  if (j.contains("gamma")) fp.gamma = j.at("gamma").get<double>();
  require_positive(fp.h, "h");
  require_positive(fp.alpha, "alpha");
  require_positive(fp.q_star, "q_star");
  require_positive(fp.delta, "delta");
  require_positive(fp.grid_resolution, "grid_resolution");
  require_positive(fp.gamma, "gamma");
  return fp;
}

PlannerParams parse_planner_params(const json& j) {
  PlannerParams pp;
  if (j.contains("max_iterations")) pp.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("step_cap")) pp.step_cap = j.at("step_cap").get<double>();
  if (j.contains("goal_tolerance")) pp.goal_tolerance = j.at("goal_tolerance").get<double>();
  if (j.contains("stall_window")) pp.stall_window = j.at("stall_window").get<int>();
  if (j.contains("stall_epsilon")) pp.stall_epsilon = j.at("stall_epsilon").get<double>();
  if (j.contains("perturb_radius")) pp.perturb_radius = j.at("perturb_radius").get<double>();
  if (j.contains("rng_seed")) pp.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  if (pp.max_iterations <= 0) throw ValidationError("max_iterations must be positive");
  if (!(pp.step_cap > 0.0 && pp.step_cap <= 1.0)) {
    throw ValidationError("step_cap must be in (0, 1.0]");
  }
  require_positive(pp.goal_tolerance, "goal_tolerance");
  if (pp.stall_window < 2) throw ValidationError("stall_window must be at least 2");
  require_positive(pp.stall_epsilon, "stall_epsilon");
  if (pp.perturb_radius < 0.0) throw ValidationError("perturb_radius must be non-negative");
  return pp;
}

PedestrianTrack parse_track(const json& j, std::size_t index) {
  PedestrianTrack track;
  const std::string where = "pedestrians[" + std::to_string(index) + "]";
  if (!j.contains("id")) throw ValidationError(where + " missing id");
  track.ped_id = j.at("id").get<int>();
  if (j.contains("frame_interval")) track.frame_interval = j.at("frame_interval").get<double>();
  require_positive(track.frame_interval, "frame_interval");
  if (!j.contains("frames") || !j.at("frames").is_array()) {
    throw ValidationError(where + " missing frames array");
  }
  for (const auto& row : j.at("frames")) {
    if (!row.is_array() || row.size() != 3) {
      throw ValidationError(where + " frames rows must be [frame, x, y]");
    }
    TrackPoint tp;
    tp.frame = row.at(0).get<std::int64_t>();
    tp.position = Point2(row.at(1).get<double>(), row.at(2).get<double>());
    if (!is_finite(tp.position)) {
      throw ValidationError(where + " has a non-finite position");
    }
    if (!track.frames.empty() && tp.frame <= track.frames.back().frame) {
      throw ValidationError(where + " frame indices must be strictly increasing");
    }
    track.frames.push_back(tp);
  }
  if (track.frames.empty()) throw ValidationError(where + " has no frames");
  return track;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario syntax error: ") + e.what());
  }

  Scenario s;
  try {
    if (doc.contains("name")) s.name = doc.at("name").get<std::string>();
    if (!doc.contains("boundaries") || !doc.at("boundaries").is_array()) {
      throw ValidationError("scenario requires a boundaries array");
    }
    for (const auto& b : doc.at("boundaries")) {
      const double a = b.at("a").get<double>();
      const double bb = b.at("b").get<double>();
      const double c = b.at("c").get<double>();
      try {
        s.boundaries.emplace_back(a, bb, c);
      } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
      }
    }
    s.start = parse_point(doc.at("start"), "start");
    s.goal = parse_point(doc.at("goal"), "goal");
    if (doc.contains("pedestrians")) {
      const auto& peds = doc.at("pedestrians");
      for (std::size_t i = 0; i < peds.size(); ++i) {
        s.pedestrians.push_back(parse_track(peds.at(i), i));
      }
    }
    if (doc.contains("field_params")) s.field_params = parse_field_params(doc.at("field_params"));
    if (doc.contains("planner_params")) {
      s.planner_params = parse_planner_params(doc.at("planner_params"));
    }
    if (doc.contains("grid")) {
      const auto& g = doc.at("grid");
      GridExtent ge;
      ge.x_min = g.at("x_min").get<double>();
      ge.y_min = g.at("y_min").get<double>();
      ge.x_max = g.at("x_max").get<double>();
      ge.y_max = g.at("y_max").get<double>();
      if (!(ge.x_max > ge.x_min && ge.y_max > ge.y_min)) {
        throw ValidationError("grid extent must have positive size");
      }
      s.grid = ge;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario structure error: ") + e.what());
  }

  if (!s.inside_drivable_region(s.start)) {
    throw ValidationError("start must lie strictly inside the drivable region");
  }
  if (!s.inside_drivable_region(s.goal)) {
    throw ValidationError("goal must lie strictly inside the drivable region");
  }
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  if (!s.name.empty()) doc["name"] = s.name;
  doc["boundaries"] = json::array();
  for (const auto& hp : s.boundaries) {
    doc["boundaries"].push_back({{"a", hp.a}, {"b", hp.b}, {"c", hp.c}});
  }
  doc["start"] = {{"x", s.start.x()}, {"y", s.start.y()}};
  doc["goal"] = {{"x", s.goal.x()}, {"y", s.goal.y()}};
  doc["pedestrians"] = json::array();
  for (const auto& track : s.pedestrians) {
    json frames = json::array();
    for (const auto& tp : track.frames) {
      frames.push_back({tp.frame, tp.position.x(), tp.position.y()});
    }
    doc["pedestrians"].push_back({{"id", track.ped_id},
                                  {"frame_interval", track.frame_interval},
                                  {"frames", std::move(frames)}});
  }
  doc["field_params"] = {{"h", s.field_params.h},
                         {"alpha", s.field_params.alpha},
                         {"q_star", s.field_params.q_star},
                         {"delta", s.field_params.delta},
                         {"grid_resolution", s.field_params.grid_resolution},
                         {"gamma", s.field_params.gamma}};
  doc["planner_params"] = {{"max_iterations", s.planner_params.max_iterations},
                           {"step_cap", s.planner_params.step_cap},
                           {"goal_tolerance", s.planner_params.goal_tolerance},
                           {"stall_window", s.planner_params.stall_window},
                           {"stall_epsilon", s.planner_params.stall_epsilon},
                           {"perturb_radius", s.planner_params.perturb_radius},
                           {"rng_seed", s.planner_params.rng_seed}};
  if (s.grid) {
    doc["grid"] = {{"x_min", s.grid->x_min},
                   {"y_min", s.grid->y_min},
                   {"x_max", s.grid->x_max},
                   {"y_max", s.grid->y_max}};
  }
  return doc.dump(2) + "\n";
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace ecas
