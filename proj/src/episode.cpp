#include "navfly/episode.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "navfly/errors.hpp"
#include "navfly/kinematics.hpp"
#include "navfly/log.hpp"
#include "navfly/planner.hpp"
#include "navfly/sensor.hpp"

namespace navfly::eval {

using world::UavState;
using world::Vec2;
using world::Vec3;

world::UavState spawn_state(const world::Scene& scene, Rng& rng) {
  const auto& zone = scene.spawn_zone;
  UavState st;
  const double margin = 1.0;
  st.position.x() = rng.uniform(zone.min.x() + margin, zone.max.x() - margin);
  st.position.y() = rng.uniform(zone.min.y() + margin, zone.max.y() - margin);
  st.position.z() = world::kCruiseAltitude;
  const auto& goal = scene.goal();
  const double bearing = std::atan2(goal.position.y() - st.position.y(),
                                    goal.position.x() - st.position.x());
  st.yaw = world::normalize_angle(bearing + rng.uniform(-M_PI / 6.0, M_PI / 6.0));
  st.clock_s = 0.0;
  return st;
}

namespace {

double horizontal_distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x() - b.x(), a.y() - b.y());
}

/// Angle between the commanded horizontal velocity (pre-step yaw) and the
/// UAV->target direction; pi when there is no horizontal motion.
double alignment_angle(const UavState& pre, const world::VelocityAction& action,
                       const UavState& post, const Vec3& target) {
  const double vx = action.forward_mps * std::cos(pre.yaw);
  const double vy = action.forward_mps * std::sin(pre.yaw);
  const double speed = std::hypot(vx, vy);
  const double tx = target.x() - post.position.x();
  const double ty = target.y() - post.position.y();
  const double tnorm = std::hypot(tx, ty);
  if (speed < 1e-9 || tnorm < 1e-9) return M_PI;
  const double c = std::clamp((vx * tx + vy * ty) / (speed * tnorm), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace

EpisodeOutcome run_episode(const world::Scene& scene, policy::Policy& pol,
                           const world::TargetInstance& goal, const EpisodeLimits& limits,
                           Rng& rng, const MetricsThresholds& thresholds,
                           const std::string& instruction, const StepSink& sink,
                           const world::UavState* start) {
  EpisodeOutcome outcome;
  outcome.target_seen = goal.seen_flag;

  UavState state = start != nullptr ? *start : spawn_state(scene, rng);
  outcome.optimal_length_m = optimal_path_length(
      scene, {state.position.x(), state.position.y()}, {goal.position.x(), goal.position.y()});

  const double initial_bearing = std::atan2(goal.position.y() - state.position.y(),
                                            goal.position.x() - state.position.x());
  const std::string instr = instruction.empty() ? "reach the " + goal.label : instruction;

  outcome.min_obstacle_clearance_m = world::kMaxRange;
  outcome.final_distance_m = horizontal_distance(state.position, goal.position);
  outcome.alignment_rad = M_PI;
  outcome.termination = Termination::kTimeout;

  for (int t = 0; t < limits.max_steps; ++t) {
    policy::PolicyInput input;
    input.depth = world::render_depth(scene, state);
    input.state = state;
    input.instruction = instr;
    input.goal_hint = initial_bearing;

    const auto vis = world::target_visible(scene, state, goal);
    world::VelocityAction action;
    try {
      action = clamp_action(pol.act(input).action);
    } catch (const std::exception& e) {
      log::warn("policy failed at step %d: %s", t, e.what());
      outcome.termination = Termination::kAborted;
      outcome.steps = t;
      return outcome;
    }
    if (sink) {
      StepSnapshot snap;
      snap.t = t;
      snap.state = state;
      snap.action = action;
      snap.depth = input.depth;
      snap.target_visible = vis.visible;
      sink(snap);
    }

    const UavState next = world::step(state, action, limits.dt);
    outcome.path_length_m += (next.position - state.position).norm();
    outcome.steps = t + 1;

    const auto collision = world::check_collision(scene, next);
    outcome.min_obstacle_clearance_m =
        std::min(outcome.min_obstacle_clearance_m, collision.min_obstacle_distance);
    outcome.final_distance_m = horizontal_distance(next.position, goal.position);
    outcome.alignment_rad = alignment_angle(state, action, next, goal.position);
    state = next;

    if (collision.collided) {
      outcome.termination = Termination::kCollision;
      break;
    }
    if (outcome.final_distance_m <= thresholds.d_tau_m &&
        outcome.alignment_rad <= thresholds.theta_tau_rad) {
      outcome.termination = Termination::kSuccess;
      break;
    }
  }
  return outcome;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  int n_threads = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min<int>(n_threads, static_cast<int>(count == 0 ? 1 : count));

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= count) return;
        try {
          fn(idx);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

MetricsReport run_split_evaluation(const SplitConfig& config) {
  if (!config.make_policy) throw ConfigError("run_split_evaluation: no policy factory");
  if (config.trials_per_condition < 1) throw ConfigError("trials_per_condition must be >= 1");
  if (config.seen_scenes.empty() || config.unseen_scenes.empty()) {
    throw ConfigError("both scene pools must be non-empty");
  }

  struct EpisodeSpec {
    bool scene_seen;
    bool target_seen;
    std::size_t scene_index;
    std::uint64_t episode_seed;
  };
  std::vector<EpisodeSpec> specs;
  for (int cond = 0; cond < 4; ++cond) {
    const bool scene_seen = cond < 2;
    const bool target_seen = (cond % 2) == 0;
    const auto& pool = scene_seen ? config.seen_scenes : config.unseen_scenes;
    for (int k = 0; k < config.trials_per_condition; ++k) {
      EpisodeSpec spec;
      spec.scene_seen = scene_seen;
      spec.target_seen = target_seen;
      spec.scene_index = static_cast<std::size_t>(k) % pool.size();
      spec.episode_seed =
          Rng::mix(config.base_seed, static_cast<std::uint64_t>(cond) * 1000003ull + k);
      specs.push_back(spec);
    }
  }

  std::vector<EpisodeOutcome> outcomes(specs.size());
  parallel_for(specs.size(), config.jobs, [&](std::size_t i) {
    const auto& spec = specs[i];
    world::Scene scene =
        spec.scene_seen ? config.seen_scenes[spec.scene_index]
                        : config.unseen_scenes[spec.scene_index];
    if (!spec.target_seen) {
      // Swap the goal's identity for a held-out label; the layout stays.
      const auto& pool = world::target_label_pool();
      std::vector<std::size_t> unseen_ids;
      for (std::size_t p = 0; p < pool.size(); ++p) {
        if (!pool[p].seen) unseen_ids.push_back(p);
      }
      Rng label_rng(Rng::mix(spec.episode_seed, 0x7A6));
      for (auto& target : scene.targets) {
        if (target.id == scene.goal_target_id) {
          target.label = pool[unseen_ids[label_rng.index(unseen_ids.size())]].label;
          target.seen_flag = false;
        }
      }
    }
    auto pol = config.make_policy(scene, scene.goal());
    Rng rng(spec.episode_seed);
    outcomes[i] = run_episode(scene, *pol, scene.goal(), config.limits, rng, config.thresholds);
    outcomes[i].scene_seen = spec.scene_seen;
    outcomes[i].target_seen = spec.target_seen;
  });

  int aborted = 0;
  for (const auto& o : outcomes) {
    if (o.termination == Termination::kAborted) ++aborted;
  }
  if (aborted > 0) log::warn("split evaluation: %d aborted episodes excluded from N", aborted);
  return compute_metrics(outcomes, config.thresholds);
}

}  // namespace navfly::eval
