#include "navfly/sensor.hpp"

#include <cmath>

namespace navfly::world {

DepthImage render_depth(const Scene& scene, const UavState& state, int width, int height,
                        double hfov_deg, double max_range) {
  DepthImage img;
  img.width = width;
  img.height = height;
  img.hfov_deg = hfov_deg;
  img.max_range = max_range;
  img.ranges.assign(static_cast<std::size_t>(width) * height, static_cast<float>(max_range));

  // Shared focal length in pixel units; vfov follows from the aspect ratio.
  const double focal = (width / 2.0) / std::tan(0.5 * hfov_deg * M_PI / 180.0);
  const Vec3 fwd(std::cos(state.yaw), std::sin(state.yaw), 0.0);
  const Vec3 left(-std::sin(state.yaw), std::cos(state.yaw), 0.0);
  const Vec3 up(0.0, 0.0, 1.0);

  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const double u = width / 2.0 - (col + 0.5);   // + toward image left
      const double v = height / 2.0 - (row + 0.5);  // + toward image top
      const Vec3 dir = (focal * fwd + u * left + v * up).normalized();

      double best = max_range;
      if (dir.z() < 0.0) {  // ground plane z = 0
        const double t = -state.position.z() / dir.z();
        if (t >= 0.0 && t < best) best = t;
      }
      for (const auto& o : scene.obstacles) {
        if (const auto hit = ray_hit(o, state.position, dir, best)) {
          if (*hit > 0.0 && *hit < best) best = *hit;
        }
      }
      img.ranges[static_cast<std::size_t>(row) * width + col] = static_cast<float>(best);
    }
  }
  return img;
}

CollisionQuery check_collision(const Scene& scene, const UavState& state, double uav_radius) {
  CollisionQuery q;
  double nearest = kMaxRange + uav_radius;
  for (const auto& o : scene.obstacles) {
    nearest = std::min(nearest, signed_distance(o, state.position));
  }
  q.min_obstacle_distance = nearest - uav_radius;
  q.collided = q.min_obstacle_distance <= 0.0;
  return q;
}

VisibilityQuery target_visible(const Scene& scene, const UavState& state,
                               const TargetInstance& target, double hfov_deg,
                               double detection_range) {
  VisibilityQuery q;
  const Vec3 delta = target.position - state.position;
  q.range = delta.norm();
  q.bearing = normalize_angle(std::atan2(delta.y(), delta.x()) - state.yaw);
  if (std::abs(q.bearing) > 0.5 * hfov_deg * M_PI / 180.0) return q;
  if (q.range > detection_range) return q;
  if (q.range > 1e-9) {
    const Vec3 dir = delta / q.range;
    for (const auto& o : scene.obstacles) {
      if (const auto hit = ray_hit(o, state.position, dir, q.range - 1e-9)) {
        if (*hit > 1e-9) return q;  // occluded
      }
    }
  }
  q.visible = true;
  return q;
}

}  // namespace navfly::world
