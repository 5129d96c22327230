#include <doctest.h>

#include <sstream>
#include <vector>

#include "ecas/errors.hpp"
#include "ecas/render.hpp"
#include "test_util.hpp"

using namespace ecas;

namespace {

EnergySurface flat_surface(double value, int width = 8, int height = 6) {
  EnergySurface s;
  s.origin = Point2(0, 0);
  s.resolution = 0.5;
  s.width = width;
  s.height = height;
  s.total = Eigen::MatrixXd::Constant(height, width, value);
  s.attractive = s.total;
  s.repulsive = Eigen::MatrixXd::Zero(height, width);
  return s;
}

std::vector<int> pgm_pixels(const std::string& pgm, int* width, int* height) {
  std::istringstream in(pgm);
  std::string magic;
  int maxval = 0;
  in >> magic >> *width >> *height >> maxval;
  REQUIRE(magic == "P2");
  REQUIRE(maxval == 255);
  std::vector<int> pixels;
  int v;
  while (in >> v) pixels.push_back(v);
  REQUIRE(static_cast<int>(pixels.size()) == *width * *height);
  return pixels;
}

}  // namespace

TEST_CASE("constant surface renders as a uniform image with a degenerate flag") {
  const auto surface = flat_surface(4.2);
  const auto images = export_surface(surface, {});
  CHECK(images.degenerate);
  int w = 0, h = 0;
  const auto pixels = pgm_pixels(images.pgm, &w, &h);
  CHECK(w == surface.width);
  CHECK(h == surface.height);
  for (int p : pixels) CHECK(p == pixels[0]);
}

TEST_CASE("argmax pixel sits within one cell of a lone obstacle") {
  Scenario s;
  s.boundaries = {HalfPlane(1, 0, 0), HalfPlane(-1, 0, 10), HalfPlane(0, 1, 0),
                  HalfPlane(0, -1, 10)};
  s.start = Point2(1, 5);
  s.goal = Point2(9, 5);
  s.field_params.grid_resolution = 0.5;
  s.field_params.q_star = 2.0;
  s.field_params.delta = 0.1;  // obstacle peak well above the attractive rim
  PedestrianTrack ped;
  ped.ped_id = 1;
  ped.frames.push_back({0, Point2(5.25, 6.25)});
  s.pedestrians.push_back(ped);
  const EnergySurface surface = build_energy_surface(s, {});

  const auto images = export_surface(surface, {});
  int w = 0, h = 0;
  const auto pixels = pgm_pixels(images.pgm, &w, &h);
  int best = 0;
  for (int i = 1; i < w * h; ++i) {
    if (pixels[i] > pixels[best]) best = i;
  }
  const int row = best / w, col = best % w;
  const int iy = h - 1 - row, ix = col;
  const Point2 center = surface.cell_center(ix, iy);
  CHECK((center - Point2(5.0, 6.0)).norm() <= surface.resolution);
}

TEST_CASE("argmin of an obstacle-free surface is the goal cell") {
  Scenario s;
  s.boundaries = {HalfPlane(1, 0, 0), HalfPlane(-1, 0, 10), HalfPlane(0, 1, 0),
                  HalfPlane(0, -1, 10)};
  s.start = Point2(2, 5);
  s.goal = Point2(7.3, 4.1);
  s.field_params.grid_resolution = 0.5;
  s.field_params.q_star = 1.0;
  const EnergySurface surface = build_energy_surface(s, {});

  RenderSpec spec;
  spec.color_scale = ColorScale::Linear;
  const auto images = export_surface(surface, spec);
  int w = 0, h = 0;
  const auto pixels = pgm_pixels(images.pgm, &w, &h);
  int best = 0;
  for (int i = 1; i < w * h; ++i) {
    if (pixels[i] < pixels[best]) best = i;
  }
  const int iy = h - 1 - best / w, ix = best % w;
  CHECK((surface.cell_center(ix, iy) - s.goal).norm() <= surface.resolution);
}

TEST_CASE("linear-scale pixel ordering preserves potential ordering") {
  Scenario s;
  s.start = Point2(1, 1);
  s.goal = Point2(6, 5);
  s.field_params.grid_resolution = 0.5;
  s.field_params.q_star = 1.0;
  const EnergySurface surface = build_energy_surface(s, {});
  RenderSpec spec;
  spec.color_scale = ColorScale::Linear;
  const auto images = export_surface(surface, spec);
  int w = 0, h = 0;
  const auto pixels = pgm_pixels(images.pgm, &w, &h);
  auto pixel_at = [&](int ix, int iy) { return pixels[(h - 1 - iy) * w + ix]; };
  for (int iy = 0; iy < surface.height; ++iy) {
    for (int ix = 0; ix + 1 < surface.width; ++ix) {
      if (surface.total(iy, ix) < surface.total(iy, ix + 1)) {
        CHECK(pixel_at(ix, iy) <= pixel_at(ix + 1, iy));
      } else if (surface.total(iy, ix) > surface.total(iy, ix + 1)) {
        CHECK(pixel_at(ix, iy) >= pixel_at(ix + 1, iy));
      }
    }
  }
}

TEST_CASE("world to image transform is affine, invertible, and exact at cell centers") {
  const auto surface = flat_surface(1.0, 12, 9);
  for (int iy = 0; iy < surface.height; ++iy) {
    for (int ix = 0; ix < surface.width; ++ix) {
      const Point2 center = surface.cell_center(ix, iy);
      const Eigen::Vector2d uv = world_to_image(surface, center);
      CHECK(uv.x() == doctest::Approx(ix + 0.5).epsilon(1e-15));
      CHECK(uv.y() == doctest::Approx(surface.height - iy - 0.5).epsilon(1e-15));
      const Point2 back = image_to_world(surface, uv);
      CHECK(back.x() == doctest::Approx(center.x()).epsilon(1e-15));
      CHECK(back.y() == doctest::Approx(center.y()).epsilon(1e-15));
    }
  }
}

TEST_CASE("overlay with an empty route equals the base image with markers") {
  const auto surface = flat_surface(2.0);
  RenderSpec spec;
  spec.start = Point2(0.75, 0.75);
  spec.goal = Point2(3.25, 2.25);
  const auto images = export_surface(surface, spec);
  PlannedRoute empty;
  const std::string overlay = overlay_route(surface, empty, {}, {}, spec);
  CHECK(overlay == images.svg);
}

TEST_CASE("perturbed waypoints are drawn in the indirect-point style") {
  const auto surface = flat_surface(2.0, 20, 20);
  PlannedRoute route;
  route.waypoints.push_back({Point2(2.0, 2.0), 0, false, 2.0});
  route.waypoints.push_back({Point2(2.8, 2.4), 1, true, 2.0});
  route.waypoints.push_back({Point2(3.6, 2.9), 2, false, 2.0});
  const std::string overlay = overlay_route(surface, route, {}, {}, {});
  CHECK(overlay.find("#ffd700") != std::string::npos);

  PlannedRoute tame = route;
  tame.waypoints[1].perturbed = false;
  const std::string plain = overlay_route(surface, tame, {}, {}, {});
  CHECK(plain.find("#ffd700") == std::string::npos);
}

TEST_CASE("route vertices map through the exact affine transform") {
  const auto surface = flat_surface(2.0, 20, 20);
  PlannedRoute route;
  route.waypoints.push_back({Point2(1.25, 7.75), 0, false, 2.0});
  route.waypoints.push_back({Point2(2.25, 7.25), 1, false, 2.0});
  const std::string overlay = overlay_route(surface, route, {}, {}, {});

  for (const auto& wp : route.waypoints) {
    const Eigen::Vector2d uv = world_to_image(surface, wp.position);
    char expected[64];
    std::snprintf(expected, sizeof(expected), "%.6f,%.6f", uv.x(), uv.y());
    CHECK(overlay.find(expected) != std::string::npos);
  }
}

TEST_CASE("waypoints outside the grid are rejected") {
  const auto surface = flat_surface(2.0);
  PlannedRoute route;
  route.waypoints.push_back({Point2(100.0, 100.0), 0, false, 0.0});
  CHECK_THROWS_AS(overlay_route(surface, route, {}, {}, {}), std::out_of_range);
}

TEST_CASE("rendering is byte-deterministic") {
  Scenario s;
  s.start = Point2(1, 1);
  s.goal = Point2(6, 5);
  s.field_params.grid_resolution = 0.5;
  s.pedestrians.push_back(test::make_linear_track(1, {3.0, 3.0}, {0.2, 0.1}, 3));
  const EnergySurface surface = build_energy_surface(s, {});
  const auto a = export_surface(surface, {});
  const auto b = export_surface(surface, {});
  CHECK(a.pgm == b.pgm);
  CHECK(a.svg == b.svg);
}

TEST_CASE("predictions CSV round-trips observed and predicted polylines") {
  PredictionArtifact artifact;
  artifact.observed.push_back(test::make_linear_track(3, {1.0, 2.0}, {0.25, -0.5}, 4));
  PredictedTrajectory pred;
  pred.ped_id = 3;
  pred.waypoints.push_back({0.4, Point2(2.0, 0.125)});
  pred.waypoints.push_back({0.8, Point2(2.25, -0.375)});
  artifact.predicted.push_back(pred);

  const auto back = predictions_from_csv(predictions_to_csv(artifact));
  REQUIRE(back.observed.size() == 1);
  REQUIRE(back.predicted.size() == 1);
  REQUIRE(back.observed[0].frames.size() == 4);
  REQUIRE(back.predicted[0].waypoints.size() == 2);
  for (int i = 0; i < 4; ++i) {
    CHECK(back.observed[0].frames[i].position == artifact.observed[0].frames[i].position);
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(back.predicted[0].waypoints[i].position == pred.waypoints[i].position);
    CHECK(back.predicted[0].waypoints[i].time_offset == pred.waypoints[i].time_offset);
  }

  CHECK_THROWS_AS(predictions_from_csv("nope\n"), ParseError);
}
