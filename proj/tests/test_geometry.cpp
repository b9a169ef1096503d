#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "navfly/geometry.hpp"
#include "navfly/rng.hpp"

using namespace navfly;
using namespace navfly::world;

namespace {

// Independent point-to-box distance for the oracle comparison: clamp to
// the box for outside points; inside, distance to the nearest face.
double brute_box_distance(const AxisBox& b, const Vec3& p) {
  const bool inside = p.x() >= b.min.x() && p.x() <= b.max.x() && p.y() >= b.min.y() &&
                      p.y() <= b.max.y() && p.z() >= b.min.z() && p.z() <= b.max.z();
  if (!inside) {
    Vec3 q = p.cwiseMax(b.min).cwiseMin(b.max);
    return (p - q).norm();
  }
  double d = p.x() - b.min.x();
  d = std::min(d, b.max.x() - p.x());
  d = std::min(d, p.y() - b.min.y());
  d = std::min(d, b.max.y() - p.y());
  d = std::min(d, p.z() - b.min.z());
  d = std::min(d, b.max.z() - p.z());
  return -d;
}

}  // namespace

TEST_CASE("cylinder signed distance analytic cases") {
  Cylinder c{{0, 0, 0}, 2.0, 6.0};
  CHECK(signed_distance(c, Vec3(0, 0, 3)) == doctest::Approx(-2.0));   // on axis, mid height
  CHECK(signed_distance(c, Vec3(5, 0, 3)) == doctest::Approx(3.0));    // radial outside
  CHECK(signed_distance(c, Vec3(0, 0, 9)) == doctest::Approx(3.0));    // above the cap
  CHECK(signed_distance(c, Vec3(5, 0, 10)) ==
        doctest::Approx(std::sqrt(3.0 * 3.0 + 4.0 * 4.0)));            // corner region
  CHECK(signed_distance(c, Vec3(1.5, 0, 5.5)) == doctest::Approx(-0.5));
}

TEST_CASE("box signed distance matches brute force on a random cloud") {
  AxisBox b{{-1, -2, 0}, {3, 1, 4}};
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p(rng.uniform(-6, 8), rng.uniform(-7, 6), rng.uniform(-4, 8));
    CHECK(signed_distance(b, p) == doctest::Approx(brute_box_distance(b, p)).epsilon(1e-12));
  }
}

TEST_CASE("ray hits cylinder laterally and on caps") {
  Cylinder c{{10, 0, 0}, 1.0, 4.0};
  const auto lateral = ray_hit(c, Vec3(0, 0, 2), Vec3(1, 0, 0), 50.0);
  REQUIRE(lateral.has_value());
  CHECK(*lateral == doctest::Approx(9.0));

  const auto above = ray_hit(c, Vec3(10, 0, 10), Vec3(0, 0, -1), 50.0);
  REQUIRE(above.has_value());
  CHECK(*above == doctest::Approx(6.0));  // hits the top cap at z = 4

  CHECK_FALSE(ray_hit(c, Vec3(0, 5, 2), Vec3(1, 0, 0), 50.0).has_value());
  CHECK_FALSE(ray_hit(c, Vec3(0, 0, 2), Vec3(-1, 0, 0), 50.0).has_value());  // behind
}

TEST_CASE("ray hits box via slabs, inside origin reports exit") {
  AxisBox b{{5, -1, 0}, {7, 1, 3}};
  const auto front = ray_hit(b, Vec3(0, 0, 1), Vec3(1, 0, 0), 50.0);
  REQUIRE(front.has_value());
  CHECK(*front == doctest::Approx(5.0));

  const auto inside = ray_hit(b, Vec3(6, 0, 1), Vec3(1, 0, 0), 50.0);
  REQUIRE(inside.has_value());
  CHECK(*inside == doctest::Approx(1.0));

  CHECK_FALSE(ray_hit(b, Vec3(0, 5, 1), Vec3(1, 0, 0), 50.0).has_value());
}

TEST_CASE("footprint overlap area") {
  Cylinder a{{0, 0, 0}, 1.0, 2.0};
  Cylinder same = a;
  const double full = footprint_overlap_area(Obstacle(a), Obstacle(same));
  CHECK(full == doctest::Approx(M_PI).epsilon(0.02));

  Cylinder far{{5, 0, 0}, 1.0, 2.0};
  CHECK(footprint_overlap_area(Obstacle(a), Obstacle(far)) == 0.0);

  AxisBox b1{{0, 0, 0}, {2, 2, 1}};
  AxisBox b2{{1, 0, 0}, {3, 2, 1}};
  CHECK(footprint_overlap_area(Obstacle(b1), Obstacle(b2)) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("segment to footprint distance") {
  Cylinder c{{5, 0, 0}, 1.0, 2.0};
  CHECK(footprint_segment_distance(Obstacle(c), {0, 0}, {10, 0}) == 0.0);  // crosses
  CHECK(footprint_segment_distance(Obstacle(c), {0, 3}, {10, 3}) == doctest::Approx(2.0));

  AxisBox b{{4, -1, 0}, {6, 1, 2}};
  CHECK(footprint_segment_distance(Obstacle(b), {0, 0}, {10, 0}) == 0.0);
  CHECK(footprint_segment_distance(Obstacle(b), {0, 4}, {10, 4}) == doctest::Approx(3.0));
  // endpoint inside
  CHECK(footprint_segment_distance(Obstacle(b), {5, 0}, {10, 10}) == 0.0);
}

TEST_CASE("angle normalization") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(normalize_angle(-3 * M_PI) == doctest::Approx(M_PI));
  CHECK(normalize_angle(2 * M_PI) == doctest::Approx(0.0));
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double n = normalize_angle(a);
    CHECK(n > -M_PI - 1e-12);
    CHECK(n <= M_PI + 1e-12);
    CHECK(std::abs(std::sin(n) - std::sin(a)) < 1e-9);
    CHECK(std::abs(std::cos(n) - std::cos(a)) < 1e-9);
  }
}
