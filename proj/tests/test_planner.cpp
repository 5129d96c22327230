#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "ecas/errors.hpp"
#include "ecas/planner.hpp"
#include "ecas/potential.hpp"
#include "test_util.hpp"

using namespace ecas;

namespace {

EnergySurface surface_from_function(const Point2& origin, double res, int width, int height,
                                    const std::function<double(const Point2&)>& f) {
  EnergySurface s;
  s.origin = origin;
  s.resolution = res;
  s.width = width;
  s.height = height;
  s.total.resize(height, width);
  s.attractive = Eigen::MatrixXd::Zero(height, width);
  s.repulsive = Eigen::MatrixXd::Zero(height, width);
  for (int iy = 0; iy < height; ++iy) {
    for (int ix = 0; ix < width; ++ix) {
      s.total(iy, ix) = f(s.cell_center(ix, iy));
    }
  }
  return s;
}

PlannerParams default_params(std::uint64_t seed = 42) {
  PlannerParams p;
  p.max_iterations = 200;
  p.rng_seed = seed;
  return p;
}

}  // namespace

TEST_CASE("gradient of a constant surface is zero") {
  const auto s = surface_from_function({0, 0}, 0.5, 20, 20, [](const Point2&) { return 3.0; });
  const auto g = surface_gradient(s, {5.0, 5.0});
  CHECK(g.gx == 0.0);
  CHECK(g.gy == 0.0);
}

TEST_CASE("gradient of a linear-in-x surface is exactly the slope") {
  const auto s =
      surface_from_function({0, 0}, 0.5, 20, 20, [](const Point2& q) { return q.x(); });
  for (const Point2 q : {Point2(3.25, 4.25), Point2(5.0, 5.0), Point2(7.3, 2.9)}) {
    const auto g = surface_gradient(s, q);
    CHECK(g.gx == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.gy == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient queries outside the interior are rejected") {
  const auto s = surface_from_function({0, 0}, 0.5, 10, 10, [](const Point2&) { return 0.0; });
  CHECK_THROWS_AS(surface_gradient(s, {0.1, 2.5}), std::out_of_range);
  CHECK_THROWS_AS(surface_gradient(s, {2.5, 4.9}), std::out_of_range);
  CHECK_NOTHROW(surface_gradient(s, {2.5, 2.5}));
}

TEST_CASE("gradient at cell centers matches finite differences of the scalar field") {
  const Point2 goal(6.0, 4.0);
  const double h = 1.3;
  const double res = 0.25;
  const auto s = surface_from_function({0, 0}, res, 48, 32, [&](const Point2& q) {
    return attractive_potential(q, goal, h);
  });

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> ix_dist(2, s.width - 3);
  std::uniform_int_distribution<int> iy_dist(2, s.height - 3);
  for (int trial = 0; trial < 50; ++trial) {
    const Point2 q = s.cell_center(ix_dist(rng), iy_dist(rng));
    const auto g = surface_gradient(s, q);
    const double fx = (attractive_potential(q + Point2(res, 0), goal, h) -
                       attractive_potential(q - Point2(res, 0), goal, h)) /
                      (2.0 * res);
    const double fy = (attractive_potential(q + Point2(0, res), goal, h) -
                       attractive_potential(q - Point2(0, res), goal, h)) /
                      (2.0 * res);
    const double scale = std::max({1e-9, std::abs(fx), std::abs(fy)});
    CHECK(std::abs(g.gx - fx) / scale < 1e-6);
    CHECK(std::abs(g.gy - fy) / scale < 1e-6);
  }
}

TEST_CASE("stall detection cases") {
  PlannerParams params = default_params();
  params.stall_window = 5;
  params.stall_epsilon = 0.5;
  const Point2 goal(100.0, 0.0);

  SUBCASE("identical points far from goal stall") {
    std::vector<RouteWaypoint> window(5, RouteWaypoint{Point2(1, 1), 0, false, 0.0});
    CHECK(detect_local_minimum(window, params, goal));
  }
  SUBCASE("steady progress does not stall") {
    std::vector<RouteWaypoint> window;
    for (int i = 0; i < 5; ++i) window.push_back({Point2(i * 1.0, 0), i, false, 0.0});
    CHECK_FALSE(detect_local_minimum(window, params, goal));
  }
  SUBCASE("oscillation within epsilon stalls") {
    std::vector<RouteWaypoint> window;
    for (int i = 0; i < 5; ++i) {
      window.push_back({Point2(i % 2 == 0 ? 0.0 : 0.1, 0), i, false, 0.0});
    }
    // Brute-force diameter of the window is 0.1 < 0.5.
    CHECK(detect_local_minimum(window, params, goal));
  }
  SUBCASE("short windows never stall") {
    std::vector<RouteWaypoint> window(3, RouteWaypoint{Point2(1, 1), 0, false, 0.0});
    CHECK_FALSE(detect_local_minimum(window, params, goal));
  }
  SUBCASE("near the goal a tight cluster is not a stall") {
    std::vector<RouteWaypoint> window(5, RouteWaypoint{Point2(99.5, 0), 0, false, 0.0});
    CHECK_FALSE(detect_local_minimum(window, params, goal));
  }
}

TEST_CASE("perturbation properties") {
  const auto s = surface_from_function({0, 0}, 0.5, 40, 40, [](const Point2& q) {
    return (q - Point2(10, 10)).squaredNorm();  // bowl centered mid-grid
  });

  SUBCASE("zero radius returns the point unchanged") {
    SeededRng rng(1);
    const Point2 q(10.0, 10.0);
    CHECK(perturb(q, rng, 0.0, s) == q);
  }
  SUBCASE("fixed seed gives identical output") {
    SeededRng r1(42), r2(42);
    const Point2 q(10.0, 10.0);
    CHECK(perturb(q, r1, 2.0, s) == perturb(q, r2, 2.0, s));
  }
  SUBCASE("candidates stay within the radius and the grid") {
    SeededRng rng(7);
    const Point2 q(10.0, 10.0);
    for (int i = 0; i < 50; ++i) {
      const Point2 c = perturb(q, rng, 2.0, s);
      CHECK((c - q).norm() <= 2.0 + 1e-12);
      CHECK(s.interior(c));
    }
  }
}

TEST_CASE("start within tolerance terminates at step zero") {
  const auto s = surface_from_function({0, 0}, 0.5, 20, 20,
                                       [](const Point2& q) { return q.norm(); });
  const auto route = plan(s, default_params(), {5.0, 5.0}, {6.0, 5.5});
  REQUIRE(route.waypoints.size() == 1);
  CHECK(route.termination == Termination::GoalReached);
  CHECK(route.waypoints[0].position == Point2(5.0, 5.0));
}

TEST_CASE("start outside the interior is an error") {
  const auto s = surface_from_function({0, 0}, 0.5, 20, 20,
                                       [](const Point2& q) { return q.norm(); });
  CHECK_THROWS_AS(plan(s, default_params(), {0.1, 5.0}, {5.0, 5.0}), ValidationError);
}

TEST_CASE("empty corridor: straight descent to the goal") {
  // 20 x 10 m corridor, conic attraction toward (18, 5) plus the constant
  // boundary term of a box region.
  Scenario scenario;
  scenario.boundaries = {HalfPlane(1, 0, 0), HalfPlane(-1, 0, 20), HalfPlane(0, 1, 0),
                         HalfPlane(0, -1, 10)};
  scenario.start = Point2(2, 5);
  scenario.goal = Point2(18, 5);
  scenario.field_params.grid_resolution = 0.25;
  scenario.field_params.q_star = 1.0;
  const EnergySurface s = build_energy_surface(scenario, {});

  const auto route = plan(s, default_params(), scenario.start, scenario.goal);
  CHECK(route.termination == Termination::GoalReached);
  CHECK(route.waypoints.size() <= 26);
  CHECK((route.waypoints.back().position - scenario.goal).norm() < 2.0);
  for (std::size_t i = 1; i < route.waypoints.size(); ++i) {
    CHECK(route.waypoints[i].position.x() > route.waypoints[i - 1].position.x());
    CHECK(std::abs(route.waypoints[i].position.y() - 5.0) < 0.5);
    CHECK_FALSE(route.waypoints[i].perturbed);
  }
}

TEST_CASE("planner contract: step cap, direction, termination, determinism") {
  // A couple of obstacles bend the route; contract must hold regardless.
  Scenario scenario;
  scenario.boundaries = {HalfPlane(1, 0, 0), HalfPlane(-1, 0, 24), HalfPlane(0, 1, 0),
                         HalfPlane(0, -1, 12)};
  scenario.start = Point2(2, 6);
  scenario.goal = Point2(22, 6);
  scenario.field_params.grid_resolution = 0.25;
  scenario.field_params.q_star = 2.0;
  scenario.field_params.delta = 0.5;
  std::vector<PredictedTrajectory> predictions;
  PredictedTrajectory wall;
  wall.ped_id = 1;
  for (int k = 0; k < 6; ++k) wall.waypoints.push_back({0.4 * (k + 1), Point2(10.0, 4.0 + k)});
  predictions.push_back(wall);
  Scenario with_peds = scenario;
  with_peds.pedestrians.push_back(test::make_linear_track(1, {10.0, 3.0}, {0.0, 0.25}, 4));
  const EnergySurface s = build_energy_surface(with_peds, predictions);

  const PlannerParams params = default_params(9);
  const auto route = plan(s, params, scenario.start, scenario.goal);
  CHECK(route.waypoints.size() <= static_cast<std::size_t>(params.max_iterations) + 1);

  for (std::size_t i = 1; i < route.waypoints.size(); ++i) {
    const Point2 step = route.waypoints[i].position - route.waypoints[i - 1].position;
    CHECK(step.norm() <= params.step_cap + 1e-12);
    if (!route.waypoints[i].perturbed) {
      const auto g = surface_gradient(s, route.waypoints[i - 1].position);
      const Point2 descent = -Point2(g.gx, g.gy).normalized();
      CHECK(step.normalized().dot(descent) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  const auto rerun = plan(s, params, scenario.start, scenario.goal);
  REQUIRE(rerun.waypoints.size() == route.waypoints.size());
  for (std::size_t i = 0; i < route.waypoints.size(); ++i) {
    CHECK(rerun.waypoints[i].position == route.waypoints[i].position);
    CHECK(rerun.waypoints[i].perturbed == route.waypoints[i].perturbed);
  }
  CHECK(route_to_csv(rerun) == route_to_csv(route));
}

TEST_CASE("potential is non-increasing along non-perturbed steps in an empty world") {
  Scenario scenario;
  scenario.boundaries = {HalfPlane(1, 0, 2), HalfPlane(-1, 0, 22), HalfPlane(0, 1, 2),
                         HalfPlane(0, -1, 10)};
  scenario.start = Point2(1.0, 3.0);
  scenario.goal = Point2(17.0, 5.0);
  scenario.field_params.grid_resolution = 0.25;
  scenario.field_params.q_star = 1.0;
  const EnergySurface s = build_energy_surface(scenario, {});
  const auto route = plan(s, default_params(), scenario.start, scenario.goal);
  CHECK(route.termination == Termination::GoalReached);
  for (std::size_t i = 1; i < route.waypoints.size(); ++i) {
    if (!route.waypoints[i].perturbed) {
      CHECK(route.waypoints[i].potential <= route.waypoints[i - 1].potential + 1e-9);
    }
  }
}

TEST_CASE("an obstacle wall forces perturbation and the planner still reaches the goal") {
  // Dense picket line across the corridor ahead of the start; descent stalls
  // against it and random moves are needed to slip through.
  Scenario scenario;
  scenario.boundaries = {HalfPlane(1, 0, 0), HalfPlane(-1, 0, 30), HalfPlane(0, 1, 0),
                         HalfPlane(0, -1, 10)};
  scenario.start = Point2(2, 5);
  scenario.goal = Point2(28, 5);
  scenario.field_params.grid_resolution = 0.25;
  scenario.field_params.q_star = 2.0;
  scenario.field_params.delta = 0.25;
  scenario.field_params.h = 1.0;

  std::vector<PredictedTrajectory> predictions;
  PredictedTrajectory wall;
  wall.ped_id = 1;
  for (int k = 0; k <= 20; ++k) {
    wall.waypoints.push_back({0.4 * (k + 1), Point2(13.0, 0.5 * k)});
  }
  predictions.push_back(wall);
  const EnergySurface s = build_energy_surface(scenario, predictions);

  PlannerParams params = default_params(42);
  params.max_iterations = 400;
  params.stall_window = 8;
  params.stall_epsilon = 2.2;
  const auto route = plan(s, params, scenario.start, scenario.goal);
  CHECK(route.termination == Termination::GoalReached);
  CHECK(route.perturbed_count() >= 1);
}

TEST_CASE("route clearance") {
  PlannedRoute route;
  route.waypoints.push_back({Point2(0, 0), 0, false, 0.0});
  route.waypoints.push_back({Point2(1, 0), 1, false, 0.0});
  route.waypoints.push_back({Point2(2, 0), 2, false, 0.0});

  SUBCASE("no obstacle points gives +infinity") {
    CHECK(std::isinf(route_clearance(route, {}, {})));
  }
  SUBCASE("route through an obstacle point gives zero") {
    PredictedTrajectory pred;
    pred.waypoints.push_back({0.4, Point2(1, 0)});
    CHECK(route_clearance(route, {pred}, {}) == 0.0);
  }
  SUBCASE("matches a brute-force pairwise minimum") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    std::vector<PredictedTrajectory> preds(2);
    std::vector<PedestrianTrack> observed(2);
    for (int i = 0; i < 2; ++i) {
      preds[i].ped_id = i;
      for (int k = 0; k < 6; ++k) {
        preds[i].waypoints.push_back({0.4 * (k + 1), Point2(coord(rng), coord(rng))});
      }
      observed[i].ped_id = i;
      observed[i].frames.push_back({0, Point2(coord(rng), coord(rng))});
      observed[i].frames.push_back({1, Point2(coord(rng), coord(rng))});
    }
    double expected = std::numeric_limits<double>::infinity();
    for (const auto& wp : route.waypoints) {
      for (const auto& p : preds) {
        for (const auto& o : p.waypoints) {
          expected = std::min(expected, (wp.position - o.position).norm());
        }
      }
      for (const auto& t : observed) {
        expected = std::min(expected, (wp.position - t.frames.back().position).norm());
      }
    }
    CHECK(std::abs(route_clearance(route, preds, observed) - expected) < 1e-12);
  }
}

TEST_CASE("route CSV round-trips waypoints and termination") {
  PlannedRoute route;
  route.termination = Termination::GoalReached;
  route.waypoints.push_back({Point2(1.25, -3.5), 0, false, 7.125});
  route.waypoints.push_back({Point2(2.2499999999999996, -3.25), 1, true, 6.0});

  const PlannedRoute back = route_from_csv(route_to_csv(route));
  CHECK(back.termination == Termination::GoalReached);
  REQUIRE(back.waypoints.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.waypoints[i].position == route.waypoints[i].position);
    CHECK(back.waypoints[i].perturbed == route.waypoints[i].perturbed);
    CHECK(back.waypoints[i].potential == route.waypoints[i].potential);
    CHECK(back.waypoints[i].step_index == route.waypoints[i].step_index);
  }

  CHECK_THROWS_AS(route_from_csv("step,x,y,perturbed,potential\n0,1,2,0,3\n"), ParseError);
  CHECK_THROWS_AS(route_from_csv("bogus\n"), ParseError);
}
