#pragma once

#include <vector>

#include "navfly/kinematics.hpp"
#include "navfly/scene.hpp"

namespace navfly::world {

/// Raycast range image from a level pinhole camera looking along yaw.
/// Row-major, row 0 at the top of the frame; ranges in meters, max-range
/// sentinel where nothing is hit.
struct DepthImage {
  int width = 32;
  int height = 24;
  double hfov_deg = 90.0;
  double max_range = kMaxRange;
  std::vector<float> ranges;  // width * height

  float at(int row, int col) const { return ranges[static_cast<std::size_t>(row) * width + col]; }
};

DepthImage render_depth(const Scene& scene, const UavState& state, int width = 32, int height = 24,
                        double hfov_deg = 90.0, double max_range = kMaxRange);

struct CollisionQuery {
  bool collided = false;
  double min_obstacle_distance = kMaxRange;  // surface distance minus UAV radius
};

/// Clearance of the UAV bounding sphere against all obstacles.
/// min_obstacle_distance is (signed distance to nearest surface) - uav_radius,
/// so a center on a cylinder axis reports -(radius + uav_radius).
CollisionQuery check_collision(const Scene& scene, const UavState& state,
                               double uav_radius = kUavRadius);

struct VisibilityQuery {
  bool visible = false;
  double bearing = 0.0;  // target bearing relative to yaw, (-pi, pi]
  double range = 0.0;    // straight-line distance to the target center
};

/// Geometric stand-in for the learned detector: the target is visible when
/// it is inside the horizontal FOV, within detection range, and the ray to
/// its center is not blocked by any obstacle.
VisibilityQuery target_visible(const Scene& scene, const UavState& state,
                               const TargetInstance& target, double hfov_deg = 90.0,
                               double detection_range = 25.0);

}  // namespace navfly::world
