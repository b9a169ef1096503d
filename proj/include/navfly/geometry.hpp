#pragma once

#include <Eigen/Core>
#include <optional>
#include <variant>
#include <vector>

namespace navfly::world {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Sensor max range; doubles as the "nothing nearby" sentinel for
/// collision and depth queries.
inline constexpr double kMaxRange = 50.0;

/// Vertical cylinder standing on the ground plane: `center` is the base
/// center (center.z() is the ground contact height, normally 0).
struct Cylinder {
  Vec3 center{0, 0, 0};
  double radius = 1.0;
  double height = 5.0;
};

/// Axis-aligned box, min < max componentwise.
struct AxisBox {
  Vec3 min{0, 0, 0};
  Vec3 max{1, 1, 1};
};

using Obstacle = std::variant<Cylinder, AxisBox>;

inline double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

/// Signed distance from a point to the obstacle surface (< 0 inside).
double signed_distance(const Cylinder& c, const Vec3& p);
double signed_distance(const AxisBox& b, const Vec3& p);
double signed_distance(const Obstacle& o, const Vec3& p);

/// Nearest ray/solid intersection parameter t >= 0 along `dir` (unit
/// length) from `origin`, or nullopt if the ray misses within max_range.
std::optional<double> ray_hit(const Cylinder& c, const Vec3& origin, const Vec3& dir,
                              double max_range);
std::optional<double> ray_hit(const AxisBox& b, const Vec3& origin, const Vec3& dir,
                              double max_range);
std::optional<double> ray_hit(const Obstacle& o, const Vec3& origin, const Vec3& dir,
                              double max_range);

/// 2D footprint helpers used by placement and the path planner.
double footprint_area(const Obstacle& o);
/// Intersection area of the two footprints, by deterministic grid
/// quadrature over the overlap bounding box (exact shapes, sampled).
double footprint_overlap_area(const Obstacle& a, const Obstacle& b, int samples_per_axis = 96);
/// Horizontal distance from a ground point to the footprint boundary (< 0 inside).
double footprint_signed_distance(const Obstacle& o, const Vec2& p);
/// Shortest horizontal distance between segment ab and the footprint (0 if crossing).
double footprint_segment_distance(const Obstacle& o, const Vec2& a, const Vec2& b);

}  // namespace navfly::world
