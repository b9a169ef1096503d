#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace navfly::eval {

enum class Termination { kSuccess, kCollision, kTimeout, kAborted };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

/// Per-episode measurements feeding the SR/CR/PER computation.
struct EpisodeOutcome {
  double final_distance_m = 0.0;        // horizontal distance to the goal at the end
  double alignment_rad = 0.0;           // angle between final commanded velocity and goal bearing
  double min_obstacle_clearance_m = 0.0;  // running min of collision clearance
  double path_length_m = 0.0;           // sum of step displacements
  double optimal_length_m = 0.0;        // planner shortest path, start -> goal
  int steps = 0;
  Termination termination = Termination::kTimeout;
  bool scene_seen = true;
  bool target_seen = true;
};

struct MetricsThresholds {
  double d_tau_m = 5.0;
  double theta_tau_rad = 15.0 * M_PI / 180.0;
  double d_col_m = 0.0;          // contact convention
  bool count_timeouts = true;    // timeouts stay in N
};

/// Success = both thresholds met (closed, <=) and the run did not collide.
bool is_success(const EpisodeOutcome& outcome, const MetricsThresholds& th = {});

struct MetricsCell {
  int n = 0;
  int successes = 0;
  int collisions = 0;
  double sr = 0.0;
  double cr = 0.0;
  std::optional<double> per;      // mean of L_opt/max(L, L_opt) over successes
  double sr_literal = 0.0;        // threshold-only success set, collisions not excluded
  int aborted = 0;
};

struct MetricsReport {
  MetricsCell overall;
  // keys: "seen_scene", "unseen_scene", "seen_target", "unseen_target",
  // and the four grid cells "seen_scene/seen_target" etc.
  std::map<std::string, MetricsCell> conditions;
  MetricsThresholds thresholds;
};

MetricsReport compute_metrics(const std::vector<EpisodeOutcome>& outcomes,
                              const MetricsThresholds& th = {});

nlohmann::json to_json(const MetricsCell& cell);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace navfly::eval
