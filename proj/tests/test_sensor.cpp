#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "navfly/rng.hpp"
#include "navfly/sensor.hpp"

using namespace navfly;
using namespace navfly::world;

namespace {

Scene empty_scene() {
  Scene scene;
  scene.side_length = 70.0;
  TargetInstance t;
  t.id = 0;
  t.label = "red sports car";
  t.position = Vec3(35, 2, 1);
  scene.targets.push_back(t);
  scene.goal_target_id = 0;
  return scene;
}

/// Sphere tracing against the signed distance field: an intersection
/// oracle independent of the analytic quadratic/slab routines.
double sphere_trace(const Scene& scene, const Vec3& origin, const Vec3& dir, double max_range) {
  double t = 0.0;
  for (int iter = 0; iter < 4000 && t < max_range; ++iter) {
    const Vec3 p = origin + t * dir;
    double d = max_range;
    for (const auto& o : scene.obstacles) d = std::min(d, signed_distance(o, p));
    if (p.z() > 0.0 && dir.z() < 0.0) d = std::min(d, p.z());  // ground plane
    if (d < 1e-6) return t;
    t += std::max(d, 1e-5);
  }
  return max_range;
}

Vec3 pixel_ray(const UavState& state, int width, int height, double hfov_deg, int row, int col) {
  const double focal = (width / 2.0) / std::tan(0.5 * hfov_deg * M_PI / 180.0);
  const Vec3 fwd(std::cos(state.yaw), std::sin(state.yaw), 0.0);
  const Vec3 left(-std::sin(state.yaw), std::cos(state.yaw), 0.0);
  const Vec3 up(0.0, 0.0, 1.0);
  const double u = width / 2.0 - (col + 0.5);
  const double v = height / 2.0 - (row + 0.5);
  return (focal * fwd + u * left + v * up).normalized();
}

}  // namespace

TEST_CASE("empty scene: level center pixel sees max range") {
  const Scene scene = empty_scene();
  UavState s;
  s.position = Vec3(35, 35, 2);
  s.yaw = 0.0;
  const DepthImage img = render_depth(scene, s, 33, 25);  // odd dims give an exact center ray
  CHECK(img.at(12, 16) == doctest::Approx(kMaxRange));
  // bottom rows see the ground inside 50 m
  CHECK(img.at(24, 16) < static_cast<float>(kMaxRange));
}

TEST_CASE("perpendicular wall reads its exact distance at the center pixel") {
  Scene scene = empty_scene();
  AxisBox wall;
  wall.min = Vec3(45, 25, 0);
  wall.max = Vec3(46, 45, 8);
  scene.obstacles.emplace_back(wall);
  UavState s;
  s.position = Vec3(35, 35, 2);
  s.yaw = 0.0;
  const DepthImage img = render_depth(scene, s, 33, 25);
  CHECK(img.at(12, 16) == doctest::Approx(10.0).epsilon(1e-7));
}

TEST_CASE("offset cylinder: left pixels nearer, sphere-tracing oracle agrees") {
  Scene scene = empty_scene();
  Cylinder c;
  c.center = Vec3(45, 38, 0);  // left of the view axis (+y is left at yaw 0)
  c.radius = 2.0;
  c.height = 8.0;
  scene.obstacles.emplace_back(c);
  UavState s;
  s.position = Vec3(35, 35, 2);
  s.yaw = 0.0;
  const int w = 64, h = 48;  // double resolution
  const DepthImage img = render_depth(scene, s, w, h);

  const int row = h / 2;
  float left_min = static_cast<float>(kMaxRange), right_min = static_cast<float>(kMaxRange);
  for (int col = 0; col < w / 2; ++col) left_min = std::min(left_min, img.at(row, col));
  for (int col = w / 2; col < w; ++col) right_min = std::min(right_min, img.at(row, col));
  CHECK(left_min < right_min);

  for (int row_i = 0; row_i < h; row_i += 3) {
    for (int col = 0; col < w; col += 3) {
      const Vec3 dir = pixel_ray(s, w, h, 90.0, row_i, col);
      const double oracle = sphere_trace(scene, s.position, dir, kMaxRange);
      CHECK(img.at(row_i, col) == doctest::Approx(oracle).epsilon(2e-4));
    }
  }
}

TEST_CASE("adding an obstacle never increases any pixel range") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Scene scene = empty_scene();
    for (int i = 0; i < 3; ++i) {
      Cylinder c;
      c.center = Vec3(rng.uniform(20, 60), rng.uniform(20, 60), 0);
      c.radius = rng.uniform(0.5, 2.5);
      c.height = rng.uniform(2, 9);
      scene.obstacles.emplace_back(c);
    }
    UavState s;
    s.position = Vec3(10, 35, 2.5);
    s.yaw = rng.uniform(-M_PI, M_PI);
    const DepthImage before = render_depth(scene, s);
    AxisBox extra;
    const double x = rng.uniform(15, 60), y = rng.uniform(15, 60);
    extra.min = Vec3(x, y, 0);
    extra.max = Vec3(x + 3, y + 3, 6);
    scene.obstacles.emplace_back(extra);
    const DepthImage after = render_depth(scene, s);
    for (std::size_t i = 0; i < before.ranges.size(); ++i) {
      CHECK(after.ranges[i] <= before.ranges[i] + 1e-6f);
    }
  }
}

TEST_CASE("collision clearance: sentinel, axis case, sign convention") {
  Scene scene = empty_scene();
  UavState s;
  s.position = Vec3(35, 35, 2);
  const auto none = check_collision(scene, s);
  CHECK_FALSE(none.collided);
  CHECK(none.min_obstacle_distance == doctest::Approx(kMaxRange));

  Cylinder c;
  c.center = Vec3(35, 35, 0);
  c.radius = 1.5;
  c.height = 6;
  scene.obstacles.emplace_back(c);
  const auto on_axis = check_collision(scene, s, 0.3);
  CHECK(on_axis.collided);
  CHECK(on_axis.min_obstacle_distance == doctest::Approx(-(1.5 + 0.3)));
}

TEST_CASE("collision grid around a box matches the brute-force distance oracle") {
  Scene scene = empty_scene();
  AxisBox b;
  b.min = Vec3(30, 30, 0);
  b.max = Vec3(34, 33, 5);
  scene.obstacles.emplace_back(b);

  int checked = 0;
  for (int ix = 0; ix < 100; ++ix) {
    for (int iy = 0; iy < 100; ++iy) {
      UavState s;
      s.position = Vec3(26 + 0.12 * ix, 27 + 0.09 * iy, 2.0);
      const auto q = check_collision(scene, s, 0.3);
      // independent point-to-box computation
      const Vec3 p = s.position;
      const Vec3 clamped = p.cwiseMax(b.min).cwiseMin(b.max);
      double expected;
      if ((p - clamped).norm() > 0.0) {
        expected = (p - clamped).norm();
      } else {
        double d = p.x() - b.min.x();
        d = std::min(d, b.max.x() - p.x());
        d = std::min(d, p.y() - b.min.y());
        d = std::min(d, b.max.y() - p.y());
        d = std::min(d, p.z() - b.min.z());
        d = std::min(d, b.max.z() - p.z());
        expected = -d;
      }
      CHECK(q.min_obstacle_distance == doctest::Approx(expected - 0.3).epsilon(1e-12));
      CHECK(q.collided == (q.min_obstacle_distance <= 0.0));
      ++checked;
    }
  }
  CHECK(checked == 10000);
}

TEST_CASE("collision implies a near pixel when the contact is in the FOV") {
  Scene scene = empty_scene();
  AxisBox wall;
  wall.min = Vec3(35.4, 30, 0);
  wall.max = Vec3(36.4, 40, 6);
  scene.obstacles.emplace_back(wall);
  UavState s;
  s.position = Vec3(35.2, 35, 2);  // 0.2 m from the face, facing it
  s.yaw = 0.0;
  const auto q = check_collision(scene, s, 0.3);
  REQUIRE(q.collided);
  const DepthImage img = render_depth(scene, s);
  float nearest = static_cast<float>(kMaxRange);
  for (const float r : img.ranges) nearest = std::min(nearest, r);
  CHECK(nearest <= 0.3f);
}

TEST_CASE("target visibility: FOV, range, and occlusion gates") {
  Scene scene = empty_scene();
  TargetInstance target;
  target.id = 1;
  target.label = "black chair";
  target.position = Vec3(45, 35, 1);
  UavState s;
  s.position = Vec3(35, 35, 2);
  s.yaw = 0.0;

  SUBCASE("directly ahead, in range") {
    const auto q = target_visible(scene, s, target);
    CHECK(q.visible);
    CHECK(q.bearing == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(q.range == doctest::Approx(std::sqrt(100.0 + 1.0)));
  }
  SUBCASE("behind the UAV") {
    s.yaw = M_PI;
    const auto q = target_visible(scene, s, target);
    CHECK_FALSE(q.visible);
    CHECK(std::abs(q.bearing) == doctest::Approx(M_PI));
  }
  SUBCASE("beyond detection range") {
    target.position = Vec3(62, 35, 1);
    CHECK_FALSE(target_visible(scene, s, target).visible);
    CHECK(target_visible(scene, s, target, 90.0, 40.0).visible);
  }
  SUBCASE("occluding wall blocks; removing it restores") {
    AxisBox wall;
    wall.min = Vec3(40, 30, 0);
    wall.max = Vec3(41, 40, 8);
    scene.obstacles.emplace_back(wall);
    CHECK_FALSE(target_visible(scene, s, target).visible);
    scene.obstacles.clear();
    CHECK(target_visible(scene, s, target).visible);
  }
  SUBCASE("just outside the half-FOV is invisible") {
    target.position = Vec3(35 + 10 * std::cos(0.8), 35 + 10 * std::sin(0.8), 1);
    CHECK_FALSE(target_visible(scene, s, target).visible);  // 45.8 deg > 45
    CHECK(target_visible(scene, s, target, 120.0).visible);
  }
}
