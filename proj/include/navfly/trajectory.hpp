#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navfly/kinematics.hpp"
#include "navfly/metrics.hpp"
#include "navfly/sensor.hpp"

namespace navfly::data {

enum class TrajectorySource { kSacAgent, kScriptedExpert };

std::string to_string(TrajectorySource s);
TrajectorySource source_from_string(const std::string& s);

struct StepRecord {
  int t = 0;
  world::UavState state;
  world::VelocityAction action;
  world::DepthImage depth;   // ranges may be empty when depth was not retained
  bool target_visible = false;
};

struct TrajectoryRecord {
  std::uint64_t id = 0;
  std::uint64_t scene_id = 0;
  std::string instruction;
  int goal_target_id = 0;
  std::vector<StepRecord> steps;
  eval::EpisodeOutcome outcome;
  TrajectorySource source = TrajectorySource::kScriptedExpert;
};

}  // namespace navfly::data
