#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navfly/geometry.hpp"
#include "navfly/rng.hpp"

namespace navfly::world {

inline constexpr double kBoundaryBand = 5.0;  // targets live within 5 m of an edge
inline constexpr double kUavRadius = 0.3;
inline constexpr double kCruiseAltitude = 2.0;

struct TargetInstance {
  int id = 0;
  std::string label;
  Vec3 position{0, 0, 1.0};
  double footprint_radius = 0.8;
  bool seen_flag = true;  // drawn from the train pool (vs held-out)
};

struct Rect2 {
  Vec2 min{0, 0};
  Vec2 max{0, 0};
  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

struct Scene {
  std::uint64_t id = 0;
  double side_length = 70.0;
  std::vector<Obstacle> obstacles;
  std::vector<TargetInstance> targets;
  int goal_target_id = 0;
  Rect2 spawn_zone;  // boundary band opposite the goal
  std::uint64_t rng_seed = 0;

  const TargetInstance& goal() const;
  const TargetInstance& target_by_id(int id) const;
};

enum class TargetPool { kSeen, kUnseen };

struct SceneParams {
  double side_length = 70.0;
  int obstacle_count_min = 6;
  int obstacle_count_max = 12;
  int target_count = 5;  // 1 goal + 3-5 distractors -> 4..6 total
  TargetPool goal_pool = TargetPool::kSeen;
};

/// The fixed object-instance pool: 60 labels, the last 10 held out as
/// unseen. Index is the stable pool id.
struct PoolEntry {
  std::string label;
  bool seen;
};
const std::vector<PoolEntry>& target_label_pool();

/// Deterministic procedural scene construction. Throws ConstructionError
/// naming the violated constraint if placement fails after bounded retries.
Scene generate_scene(std::uint64_t seed, const SceneParams& params = {});

/// Checks every Scene invariant; returns an empty string when valid, else
/// a description of the first violation.
std::string validate_scene(const Scene& scene);

/// Occupancy-grid BFS reachability from the spawn zone to the goal with
/// the UAV radius plus a clearance margin. Independent of the
/// visibility-graph planner, which tests use as the oracle.
bool grid_reachable(const Scene& scene, double clearance = kUavRadius + 0.45);

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

}  // namespace navfly::world
