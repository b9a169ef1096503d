#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "navfly/sensor.hpp"

namespace navfly::policy {

struct PolicyInput {
  world::DepthImage depth;
  world::UavState state;
  std::string instruction;
  /// Coarse guidance: the bearing to the goal at episode start, world
  /// frame, never refreshed afterwards.
  std::optional<double> goal_hint;
};

struct PolicyOutput {
  world::VelocityAction action;
  std::map<std::string, double> aux;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyOutput act(const PolicyInput& input) = 0;
};

struct ExpertConfig {
  double cruise_altitude = world::kCruiseAltitude;
  double stop_range_m = 1.0;    // forward speed reaches zero here
  double free_range_m = 6.0;    // ... and full speed here
  double avoid_range_m = 5.0;   // repulsive steering engages below this
  double terminal_range_m = 8.0;  // switch to target alignment once visible and closer
  double attract_gain = 1.5;
  double avoid_gain = 1.5;
  world::ActionLimits limits;
};

/// Potential-field pilot used as the demonstration source: attractive
/// bearing-to-goal steering plus depth-based repulsion, with a terminal
/// alignment behavior near the visible target. Deterministic.
std::unique_ptr<Policy> make_scripted_expert(const world::Scene& scene,
                                             const world::TargetInstance& goal,
                                             const ExpertConfig& config = {});

}  // namespace navfly::policy
