// Command-line front end: predict pedestrian trajectories, plan a
// collision-free route over the potential-field energy surface, train a
// desk-scale predictor, and render the risk artifacts.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecas/dataset.hpp"
#include "ecas/errors.hpp"
#include "ecas/log.hpp"
#include "ecas/metrics.hpp"
#include "ecas/planner.hpp"
#include "ecas/prediction.hpp"
#include "ecas/render.hpp"
#include "ecas/scenario.hpp"
#include "ecas/srlstm.hpp"
#include "ecas/surface.hpp"
#include "ecas/text_io.hpp"

namespace {

using namespace ecas;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMaxIterations = 2;

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// Groups frame-aligned tracks so the recurrent model can refine neighbors
// jointly; tracks with unique frame windows form singleton scenes.
std::vector<std::vector<PedestrianTrack>> group_aligned(
    const std::vector<PedestrianTrack>& tracks) {
  std::map<std::vector<std::int64_t>, std::vector<PedestrianTrack>> groups;
  for (const auto& track : tracks) {
    std::vector<std::int64_t> key;
    key.reserve(track.frames.size());
    for (const auto& tp : track.frames) key.push_back(tp.frame);
    groups[key].push_back(track);
  }
  std::vector<std::vector<PedestrianTrack>> out;
  out.reserve(groups.size());
  for (auto& [key, group] : groups) out.push_back(std::move(group));
  return out;
}

std::vector<PredictedTrajectory> run_prediction(const std::string& model_choice,
                                                const std::optional<SrLstmModel>& model,
                                                const std::vector<PedestrianTrack>& histories,
                                                int pred_len) {
  std::vector<PredictedTrajectory> out;
  if (model_choice == "cv") {
    for (const auto& track : histories) {
      out.push_back(predict_constant_velocity(track, pred_len));
    }
    return out;
  }
  for (const auto& scene : group_aligned(histories)) {
    auto preds = predict_srlstm(*model, scene, pred_len);
    out.insert(out.end(), preds.begin(), preds.end());
  }
  return out;
}

struct PredictOptions {
  std::string dataset;
  std::string model = "cv";
  std::string checkpoint;
  int obs = 8;
  int pred = 12;
  std::string out = "ecas_predict";
};

int cmd_predict(const PredictOptions& opt) {
  const auto loaded = load_trajectory_dataset_file(opt.dataset);
  if (loaded.dropped_short_tracks > 0) {
    log_info("dropped " + std::to_string(loaded.dropped_short_tracks) +
             " track(s) with fewer than 2 frames");
  }

  std::optional<SrLstmModel> model;
  if (opt.model == "srlstm") model = load_checkpoint(opt.checkpoint);

  std::vector<PedestrianTrack> histories;
  std::vector<PedestrianTrack> truths;
  int skipped = 0;
  for (const auto& track : loaded.tracks) {
    auto split = split_obs_pred(track, opt.obs, opt.pred);
    if (!split.ok) {
      log_debug("skipping: " + split.skip_reason);
      ++skipped;
      continue;
    }
    histories.push_back(std::move(split.history));
    truths.push_back(std::move(split.ground_truth));
  }
  if (histories.empty()) {
    throw ValidationError("no track has the " + std::to_string(opt.obs) + "+" +
                          std::to_string(opt.pred) + " frames required for evaluation");
  }

  const auto predictions = run_prediction(opt.model, model, histories, opt.pred);

  // Metric rows follow the history order; predictions may be scene-reordered.
  std::map<int, const PredictedTrajectory*> by_id;
  for (const auto& pred : predictions) by_id[pred.ped_id] = &pred;

  std::string metrics_csv = "ped_id,mad,fad\n";
  double mad_sum = 0.0;
  double fad_sum = 0.0;
  for (std::size_t i = 0; i < histories.size(); ++i) {
    const auto* pred = by_id.at(histories[i].ped_id);
    const double m = mad(*pred, truths[i]);
    const double f = fad(*pred, truths[i]);
    mad_sum += m;
    fad_sum += f;
    metrics_csv += std::to_string(histories[i].ped_id) + "," + format_double(m) + "," +
                   format_double(f) + "\n";
  }
  const double mad_avg = mad_sum / static_cast<double>(histories.size());
  const double fad_avg = fad_sum / static_cast<double>(histories.size());
  metrics_csv += "# aggregate," + format_double(mad_avg) + "," + format_double(fad_avg) + "\n";

  ensure_parent_dir(opt.out);
  write_text_file(opt.out + ".metrics.csv", metrics_csv);
  PredictionArtifact artifact{histories, predictions};
  write_text_file(opt.out + ".predictions.csv", predictions_to_csv(artifact));

  std::cout << "tracks evaluated: " << histories.size() << " (skipped " << skipped << ")\n";
  std::cout << "aggregate MAD " << format_double(mad_avg) << " m, FAD "
            << format_double(fad_avg) << " m\n";
  return kExitOk;
}

struct TrainOptions {
  std::string dataset;
  int obs = 8;
  int pred = 12;
  int epochs = 200;
  int batch = 64;
  double lr = 0.05;
  int hidden = 8;
  int embed = 8;
  double radius = 2.0;
  int layers = 1;
  std::uint64_t seed = 0;
  std::string out = "ecas_model.json";
};

int cmd_train(const TrainOptions& opt) {
  const auto loaded = load_trajectory_dataset_file(opt.dataset);
  SrLstmHyper hyper;
  hyper.hidden = opt.hidden;
  hyper.embed = opt.embed;
  hyper.neighbor_radius = opt.radius;
  hyper.refinement_layers = opt.layers;
  const SrLstmModel initial = init_srlstm(hyper, opt.seed);
  const auto result =
      train_desk_scale(initial, loaded.tracks, opt.epochs, opt.batch, opt.lr, opt.obs, opt.pred);
  ensure_parent_dir(opt.out);
  save_checkpoint(result.model, opt.out);
  if (!result.loss_trace.empty()) {
    std::cout << "final training loss " << format_double(result.loss_trace.back())
              << " m^2 after " << result.loss_trace.size() << " epochs\n";
  }
  std::cout << "checkpoint written to " << opt.out << "\n";
  return kExitOk;
}

struct PlanOptions {
  std::string scenario;
  std::string out = "ecas_plan";
  std::string model = "cv";
  std::string checkpoint;
  int pred = 12;
  std::optional<double> resolution, h, alpha, qstar, delta, gamma;
  std::optional<double> step_cap, goal_tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
};

int cmd_plan(const PlanOptions& opt) {
  Scenario scenario = load_scenario_file(opt.scenario);
  if (scenario.name.empty()) {
    scenario.name = std::filesystem::path(opt.scenario).stem().string();
  }
  // Flag > file > default.
  if (opt.resolution) scenario.field_params.grid_resolution = *opt.resolution;
  if (opt.h) scenario.field_params.h = *opt.h;
  if (opt.alpha) scenario.field_params.alpha = *opt.alpha;
  if (opt.qstar) scenario.field_params.q_star = *opt.qstar;
  if (opt.delta) scenario.field_params.delta = *opt.delta;
  if (opt.gamma) scenario.field_params.gamma = *opt.gamma;
  if (opt.step_cap) scenario.planner_params.step_cap = *opt.step_cap;
  if (opt.goal_tol) scenario.planner_params.goal_tolerance = *opt.goal_tol;
  if (opt.max_iter) scenario.planner_params.max_iterations = *opt.max_iter;
  if (opt.seed) scenario.planner_params.rng_seed = *opt.seed;

  std::optional<SrLstmModel> model;
  if (opt.model == "srlstm") model = load_checkpoint(opt.checkpoint);

  std::vector<PedestrianTrack> predictable;
  for (const auto& track : scenario.pedestrians) {
    if (track.frames.size() >= 2) predictable.push_back(track);
  }

  const double t0 = now_ms();
  const auto predictions = run_prediction(opt.model, model, predictable, opt.pred);
  const double t1 = now_ms();
  const EnergySurface surface = build_energy_surface(scenario, predictions);
  const double t2 = now_ms();
  const PlannedRoute route =
      plan(surface, scenario.planner_params, scenario.start, scenario.goal);
  const double t3 = now_ms();
  const double clearance = route_clearance(route, predictions, scenario.pedestrians);

  ensure_parent_dir(opt.out);
  write_surface_csv(surface, opt.out + ".surface.csv");
  write_route_csv(route, opt.out + ".route.csv");
  write_text_file(opt.out + ".predictions.csv",
                  predictions_to_csv({scenario.pedestrians, predictions}));

  const bool reached = route.termination == Termination::GoalReached;
  const bool has_peds = !scenario.pedestrians.empty();

  std::string report_txt;
  report_txt += "scenario: " + scenario.name + "\n";
  report_txt += "pedestrians: " + std::to_string(scenario.pedestrians.size()) + "\n";
  for (const auto& track : scenario.pedestrians) {
    report_txt += "  pedestrian " + std::to_string(track.ped_id) + " avg speed " +
                  format_double(average_speed(track)) + " m/s\n";
  }
  if (!predictable.empty()) {
    report_txt += "prediction horizon: " +
                  format_double(opt.pred * predictable.front().frame_interval) + " s (" +
                  std::to_string(opt.pred) + " steps)\n";
  }
  report_txt += "route steps: " + std::to_string(route.waypoints.size() - 1) + "\n";
  report_txt += "route length: " + format_double(route.path_length()) + " m\n";
  report_txt += "perturbed waypoints: " + std::to_string(route.perturbed_count()) + "\n";
  report_txt += std::string("termination: ") + (reached ? "GoalReached" : "MaxIterations") + "\n";
  if (has_peds) report_txt += "min clearance: " + format_double(clearance) + " m\n";
  report_txt += "timing: predict " + format_double(t1 - t0) + " ms, surface " +
                format_double(t2 - t1) + " ms, plan " + format_double(t3 - t2) + " ms\n";
  write_text_file(opt.out + ".report.txt", report_txt);

  std::string report_json = "{\n  \"scenario\": \"" + scenario.name + "\",\n";
  report_json += "  \"pedestrians\": " + std::to_string(scenario.pedestrians.size()) + ",\n";
  report_json += "  \"route_steps\": " + std::to_string(route.waypoints.size() - 1) + ",\n";
  report_json += "  \"route_length_m\": " + format_double(route.path_length()) + ",\n";
  report_json += "  \"perturbed_waypoints\": " + std::to_string(route.perturbed_count()) + ",\n";
  report_json += std::string("  \"termination\": \"") +
                 (reached ? "GoalReached" : "MaxIterations") + "\",\n";
  report_json += "  \"min_clearance_m\": " +
                 (has_peds ? format_double(clearance) : std::string("null")) + ",\n";
  report_json += "  \"timing_ms\": {\"predict\": " + format_double(t1 - t0) +
                 ", \"surface\": " + format_double(t2 - t1) +
                 ", \"plan\": " + format_double(t3 - t2) + "}\n}\n";
  write_text_file(opt.out + ".report.json", report_json);

  std::cout << report_txt;
  return reached ? kExitOk : kExitMaxIterations;
}

struct RenderOptions {
  std::string surface;
  std::string route;
  std::string predictions;
  std::string out = "ecas_render";
  std::string scale = "log";
  std::optional<double> clip;
  std::optional<double> goal_x, goal_y;
};

int cmd_render(const RenderOptions& opt) {
  const EnergySurface surface = read_surface_csv(opt.surface);
  const PlannedRoute route = read_route_csv(opt.route);
  PredictionArtifact artifact;
  if (!opt.predictions.empty()) artifact = predictions_from_csv(read_text_file(opt.predictions));

  RenderSpec spec;
  spec.color_scale = opt.scale == "linear" ? ColorScale::Linear : ColorScale::Log;
  spec.value_clip = opt.clip;
  if (!route.waypoints.empty()) spec.start = route.waypoints.front().position;
  if (opt.goal_x && opt.goal_y) spec.goal = Point2(*opt.goal_x, *opt.goal_y);

  const SurfaceImages images = export_surface(surface, spec);
  if (images.degenerate) log_info("surface is constant; rendering a uniform image");
  const std::string overlay =
      overlay_route(surface, route, artifact.predicted, artifact.observed, spec);

  ensure_parent_dir(opt.out);
  write_text_file(opt.out + ".surface.pgm", images.pgm);
  write_text_file(opt.out + ".surface.svg", images.svg);
  write_text_file(opt.out + ".overlay.svg", overlay);
  std::cout << "wrote " << opt.out << ".surface.pgm, .surface.svg, .overlay.svg\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"e-scooter collision avoidance: prediction, risk surface, route planning"};
  app.require_subcommand(1);
  // --h is a field-strength flag below, so help is long-form only.
  app.set_help_flag("--help", "print help");

  PredictOptions predict_opt;
  auto* predict = app.add_subcommand("predict", "predict trajectories and report MAD/FAD");
  predict->add_option("--dataset", predict_opt.dataset, "trajectory dataset file")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--model", predict_opt.model, "prediction model")
      ->check(CLI::IsMember({"cv", "srlstm"}));
  auto* predict_ckpt = predict->add_option("--checkpoint", predict_opt.checkpoint,
                                           "model checkpoint (required for srlstm)");
  predict->add_option("--obs", predict_opt.obs, "observed frames")->check(CLI::PositiveNumber);
  predict->add_option("--pred", predict_opt.pred, "predicted frames")
      ->check(CLI::PositiveNumber);
  predict->add_option("--out", predict_opt.out, "output prefix");

  TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "train a desk-scale recurrent predictor");
  train->add_option("--dataset", train_opt.dataset, "trajectory dataset file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--obs", train_opt.obs)->check(CLI::PositiveNumber);
  train->add_option("--pred", train_opt.pred)->check(CLI::PositiveNumber);
  train->add_option("--epochs", train_opt.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--batch", train_opt.batch)->check(CLI::PositiveNumber);
  train->add_option("--lr", train_opt.lr);
  train->add_option("--hidden", train_opt.hidden)->check(CLI::PositiveNumber);
  train->add_option("--embed", train_opt.embed)->check(CLI::PositiveNumber);
  train->add_option("--radius", train_opt.radius)->check(CLI::PositiveNumber);
  train->add_option("--layers", train_opt.layers)->check(CLI::PositiveNumber);
  train->add_option("--seed", train_opt.seed);
  train->add_option("--out", train_opt.out, "checkpoint path");

  PlanOptions plan_opt;
  auto* planner = app.add_subcommand("plan", "plan a collision-free route for a scenario");
  planner->set_help_flag("--help", "print help");
  planner->add_option("--scenario", plan_opt.scenario, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  planner->add_option("--out", plan_opt.out, "output prefix");
  planner->add_option("--model", plan_opt.model)->check(CLI::IsMember({"cv", "srlstm"}));
  auto* plan_ckpt = planner->add_option("--checkpoint", plan_opt.checkpoint);
  planner->add_option("--pred", plan_opt.pred, "prediction steps")->check(CLI::PositiveNumber);
  planner->add_option("--resolution", plan_opt.resolution);
  planner->add_option("--h", plan_opt.h);
  planner->add_option("--alpha", plan_opt.alpha);
  planner->add_option("--qstar", plan_opt.qstar);
  planner->add_option("--delta", plan_opt.delta);
  planner->add_option("--gamma", plan_opt.gamma);
  planner->add_option("--step-cap", plan_opt.step_cap);
  planner->add_option("--goal-tol", plan_opt.goal_tol);
  planner->add_option("--max-iter", plan_opt.max_iter);
  planner->add_option("--seed", plan_opt.seed);

  RenderOptions render_opt;
  auto* render = app.add_subcommand("render", "render surface and route artifacts");
  render->add_option("--surface", render_opt.surface, "surface CSV from plan")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("--route", render_opt.route, "route CSV from plan")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("--predictions", render_opt.predictions, "predictions CSV from plan")
      ->check(CLI::ExistingFile);
  render->add_option("--out", render_opt.out, "output prefix");
  render->add_option("--scale", render_opt.scale)->check(CLI::IsMember({"linear", "log"}));
  render->add_option("--clip", render_opt.clip, "clip potentials above this value");
  render->add_option("--goal-x", render_opt.goal_x);
  render->add_option("--goal-y", render_opt.goal_y);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (predict->parsed()) {
      if (predict_opt.model == "srlstm" && predict_ckpt->count() == 0) {
        log_error("--model srlstm requires --checkpoint");
        return kExitUsage;
      }
      return cmd_predict(predict_opt);
    }
    if (train->parsed()) return cmd_train(train_opt);
    if (planner->parsed()) {
      if (plan_opt.model == "srlstm" && plan_ckpt->count() == 0) {
        log_error("--model srlstm requires --checkpoint");
        return kExitUsage;
      }
      return cmd_plan(plan_opt);
    }
    if (render->parsed()) return cmd_render(render_opt);
  } catch (const std::exception& e) {
    log_error(e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
