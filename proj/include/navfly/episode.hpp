#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "navfly/metrics.hpp"
#include "navfly/policy.hpp"
#include "navfly/rng.hpp"
#include "navfly/scene.hpp"

namespace navfly::eval {

struct EpisodeLimits {
  int max_steps = 300;
  double dt = 0.2;
};

/// Everything observed at one control tick: the pre-step state, the
/// observation the policy saw, the action it commanded, and the cached
/// visibility oracle output for later phase segmentation.
struct StepSnapshot {
  int t = 0;
  world::UavState state;
  world::VelocityAction action;
  world::DepthImage depth;
  bool target_visible = false;
};

using StepSink = std::function<void(const StepSnapshot&)>;

/// Random start in the spawn zone at cruise altitude, yawed toward the
/// goal with up to +-30 deg of jitter.
world::UavState spawn_state(const world::Scene& scene, Rng& rng);

/// Rolls one episode. Terminates on the first of: dual success criterion
/// met, collision, or max_steps. A policy exception aborts the episode
/// (termination = kAborted). `start` overrides the random spawn.
EpisodeOutcome run_episode(const world::Scene& scene, policy::Policy& pol,
                           const world::TargetInstance& goal, const EpisodeLimits& limits,
                           Rng& rng, const MetricsThresholds& thresholds = {},
                           const std::string& instruction = "", const StepSink& sink = nullptr,
                           const world::UavState* start = nullptr);

using PolicyFactory = std::function<std::unique_ptr<policy::Policy>(
    const world::Scene& scene, const world::TargetInstance& goal)>;

struct SplitConfig {
  int trials_per_condition = 30;
  std::uint64_t base_seed = 0;
  EpisodeLimits limits;
  MetricsThresholds thresholds;
  std::vector<world::Scene> seen_scenes;
  std::vector<world::Scene> unseen_scenes;
  int jobs = 0;  // 0 = hardware concurrency
  PolicyFactory make_policy;
};

/// Runs the 2x2 (seen/unseen scene x seen/unseen target) grid and
/// aggregates one report. Deterministic for a fixed config: every episode
/// seed derives from (base_seed, condition, trial) regardless of the
/// worker count.
MetricsReport run_split_evaluation(const SplitConfig& config);

/// Bounded-concurrency helper shared by the episode-level drivers.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace navfly::eval
