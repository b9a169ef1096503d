#include "navfly/policy.hpp"

#include <algorithm>
#include <cmath>

namespace navfly::policy {

using world::normalize_angle;
using world::Vec3;

namespace {

struct DepthSummary {
  double center_min = world::kMaxRange;  // |azimuth| <= 20 deg
  double left_mean = world::kMaxRange;   // azimuth in [+5, +35] deg (left of heading)
  double right_mean = world::kMaxRange;  // azimuth in [-35, -5] deg
};

/// Pools the depth frame over an elevation band that cannot see the
/// ground at avoidance range, so ground returns never read as obstacles.
DepthSummary summarize(const world::DepthImage& img) {
  DepthSummary s;
  if (img.ranges.empty()) return s;
  const double focal = (img.width / 2.0) / std::tan(0.5 * img.hfov_deg * M_PI / 180.0);
  double left_sum = 0.0, right_sum = 0.0;
  int left_n = 0, right_n = 0;
  for (int row = 0; row < img.height; ++row) {
    const double v = img.height / 2.0 - (row + 0.5);
    const double elevation = std::atan2(v, focal);
    if (elevation < -10.0 * M_PI / 180.0 || elevation > 15.0 * M_PI / 180.0) continue;
    for (int col = 0; col < img.width; ++col) {
      const double u = img.width / 2.0 - (col + 0.5);
      const double azimuth = std::atan2(u, focal);  // + to the left
      const double range = img.at(row, col);
      const double az_deg = azimuth * 180.0 / M_PI;
      if (std::abs(az_deg) <= 20.0) s.center_min = std::min(s.center_min, range);
      if (az_deg >= 5.0 && az_deg <= 35.0) {
        left_sum += range;
        ++left_n;
      }
      if (az_deg <= -5.0 && az_deg >= -35.0) {
        right_sum += range;
        ++right_n;
      }
    }
  }
  if (left_n > 0) s.left_mean = left_sum / left_n;
  if (right_n > 0) s.right_mean = right_sum / right_n;
  return s;
}

class ScriptedExpert final : public Policy {
 public:
  ScriptedExpert(const world::Scene& scene, const world::TargetInstance& goal,
                 const ExpertConfig& cfg)
      : scene_(scene), goal_(goal), cfg_(cfg) {}

  PolicyOutput act(const PolicyInput& input) override {
    const auto& st = input.state;
    const Vec3 delta = goal_.position - st.position;
    const double bearing_err = normalize_angle(std::atan2(delta.y(), delta.x()) - st.yaw);
    const auto vis = world::target_visible(scene_, st, goal_);
    const DepthSummary depth = summarize(input.depth);

    double v_forward = 0.0;
    double yaw_rate = 0.0;
    double mode = 0.0;
    if (vis.visible && vis.range < cfg_.terminal_range_m) {
      // Terminal approach: line up with the target, creep in.
      mode = 1.0;
      yaw_rate = 2.0 * bearing_err;
      const double aligned = std::abs(bearing_err) < M_PI / 3.0 ? 1.0 : 0.15;
      v_forward = std::clamp(0.6 * vis.range, 0.3, 1.5) * aligned;
    } else {
      const double clearance_scale =
          std::clamp((depth.center_min - cfg_.stop_range_m) / (cfg_.free_range_m - cfg_.stop_range_m),
                     0.0, 1.0);
      v_forward = cfg_.limits.forward_max * clearance_scale;
      if (std::abs(bearing_err) > M_PI / 2.0) v_forward = std::min(v_forward, 0.4);

      const double attract = cfg_.attract_gain * bearing_err;
      double avoid = 0.0;
      if (depth.center_min < cfg_.avoid_range_m) {
        const double side = depth.left_mean >= depth.right_mean ? 1.0 : -1.0;
        avoid = side * cfg_.avoid_gain * (1.0 - depth.center_min / cfg_.avoid_range_m);
      }
      // Goal attraction yields as obstacles close in.
      const double attract_weight = std::clamp(depth.center_min / cfg_.avoid_range_m, 0.0, 1.0);
      yaw_rate = attract * attract_weight + avoid;
    }

    const double v_vertical = std::clamp(cfg_.cruise_altitude - st.position.z(), -1.0, 1.0);

    world::VelocityAction action{static_cast<float>(v_forward), static_cast<float>(yaw_rate),
                                 static_cast<float>(v_vertical)};
    action = clamp_action(action, cfg_.limits);
    PolicyOutput out;
    out.action = action;
    out.aux = {{"mode", mode},
               {"bearing_err", bearing_err},
               {"center_min", depth.center_min},
               {"target_range", vis.range}};
    return out;
  }

 private:
  const world::Scene& scene_;
  world::TargetInstance goal_;
  ExpertConfig cfg_;
};

}  // namespace

std::unique_ptr<Policy> make_scripted_expert(const world::Scene& scene,
                                             const world::TargetInstance& goal,
                                             const ExpertConfig& config) {
  return std::make_unique<ScriptedExpert>(scene, goal, config);
}

}  // namespace navfly::policy
