#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "navfly/kinematics.hpp"
#include "navfly/rng.hpp"

using namespace navfly;
using namespace navfly::world;

TEST_CASE("zero action is the identity on pose") {
  UavState s;
  s.position = Vec3(4, -2, 3);
  s.yaw = 0.7;
  for (const double dt : {0.01, 0.2, 0.5}) {
    const UavState n = step(s, {}, dt);
    CHECK(n.position == s.position);
    CHECK(n.yaw == s.yaw);
    CHECK(n.clock_s == doctest::Approx(s.clock_s + dt));
  }
}

TEST_CASE("straight segment is exact") {
  UavState s;
  s.position = Vec3(0, 0, 2);
  s.yaw = 0.0;
  const UavState n = step(s, {2.0f, 0.0f, 0.0f}, 0.5);
  CHECK(n.position.x() == 1.0);  // 0 + 0.5 * 2 * cos(0), exactly
  CHECK(n.position.y() == 0.0);
  CHECK(n.position.z() == 2.0);
}

TEST_CASE("actions are clamped to limits") {
  UavState s;
  const UavState n = step(s, {100.0f, -100.0f, 100.0f}, 0.1);
  CHECK(n.position.x() == doctest::Approx(0.1 * 3.0));
  CHECK(n.yaw == doctest::Approx(-0.15));
  CHECK(n.position.z() == doctest::Approx(2.0 + 0.1 * 1.0));
}

TEST_CASE("altitude stays in the flight band") {
  UavState s;
  s.position.z() = 0.6;
  UavState n = s;
  for (int i = 0; i < 20; ++i) n = step(n, {0.0f, 0.0f, -1.0f}, 0.5);
  CHECK(n.position.z() == kAltitudeMin);
  for (int i = 0; i < 100; ++i) n = step(n, {0.0f, 0.0f, 1.0f}, 0.5);
  CHECK(n.position.z() == kAltitudeMax);
}

TEST_CASE("straight-line integrator reverses exactly") {
  Rng rng(42);
  UavState s;
  s.position = Vec3(10, 10, 5);
  s.yaw = rng.uniform(-M_PI, M_PI);

  std::vector<VelocityAction> actions;
  UavState cur = s;
  for (int i = 0; i < 100; ++i) {
    // yaw_rate = 0 and mild vertical so the altitude clamp never engages
    VelocityAction a{static_cast<float>(rng.uniform(-2.5, 2.5)), 0.0f,
                     static_cast<float>(rng.uniform(-0.1, 0.1))};
    actions.push_back(a);
    cur = step(cur, a, 0.2);
  }
  for (auto it = actions.rbegin(); it != actions.rend(); ++it) {
    VelocityAction r{-it->forward_mps, 0.0f, -it->vertical_mps};
    cur = step(cur, r, 0.2);
  }
  CHECK((cur.position - s.position).norm() < 1e-9);
  CHECK(cur.yaw == s.yaw);
}

TEST_CASE("path length under zero yaw rate is the analytic sum") {
  Rng rng(3);
  UavState cur;
  cur.position = Vec3(20, 20, 5);
  cur.yaw = 1.1;
  double expected = 0.0;
  double traveled = 0.0;
  for (int i = 0; i < 50; ++i) {
    VelocityAction a{static_cast<float>(rng.uniform(-3, 3)), 0.0f,
                     static_cast<float>(rng.uniform(-0.2, 0.2))};
    const UavState next = step(cur, a, 0.2);
    traveled += (next.position - cur.position).norm();
    expected += 0.2 * std::sqrt(static_cast<double>(a.forward_mps) * a.forward_mps +
                                static_cast<double>(a.vertical_mps) * a.vertical_mps);
    cur = next;
  }
  CHECK(traveled == doctest::Approx(expected).epsilon(1e-12));
}
