#pragma once

#include <algorithm>
#include <cmath>

#include "navfly/geometry.hpp"

namespace navfly::world {

/// Velocity command, the 3-DoF action space: forward speed along the yaw
/// direction, yaw rate, vertical speed. Stored in f32 because that is the
/// precision the downlink wire format and the dataset carry; policies emit
/// f32 so local and remote runs produce bit-identical streams.
struct VelocityAction {
  float forward_mps = 0.0f;
  float yaw_rate_radps = 0.0f;
  float vertical_mps = 0.0f;
};

struct ActionLimits {
  double forward_max = 3.0;
  double yaw_rate_max = 1.5;
  double vertical_max = 1.0;
};

inline VelocityAction clamp_action(const VelocityAction& a, const ActionLimits& lim = {}) {
  const auto clamp_f = [](float v, double m) {
    return static_cast<float>(std::clamp(static_cast<double>(v), -m, m));
  };
  return {clamp_f(a.forward_mps, lim.forward_max), clamp_f(a.yaw_rate_radps, lim.yaw_rate_max),
          clamp_f(a.vertical_mps, lim.vertical_max)};
}

struct UavState {
  Vec3 position{0, 0, 2.0};
  double yaw = 0.0;        // radians, (-pi, pi]
  double clock_s = 0.0;    // episode time
};

inline constexpr double kAltitudeMin = 0.5;
inline constexpr double kAltitudeMax = 10.0;

/// First-order integrator for the 3-DoF command. The translation uses the
/// pre-step yaw; yaw integrates independently.
inline UavState step(const UavState& state, const VelocityAction& action, double dt,
                     const ActionLimits& lim = {}) {
  const VelocityAction a = clamp_action(action, lim);
  UavState next = state;
  next.position.x() += dt * a.forward_mps * std::cos(state.yaw);
  next.position.y() += dt * a.forward_mps * std::sin(state.yaw);
  next.position.z() += dt * a.vertical_mps;
  next.position.z() = std::clamp(next.position.z(), kAltitudeMin, kAltitudeMax);
  next.yaw = normalize_angle(state.yaw + dt * a.yaw_rate_radps);
  next.clock_s = state.clock_s + dt;
  return next;
}

}  // namespace navfly::world
