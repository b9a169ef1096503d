#include "navfly/scene.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <fstream>

#include "navfly/errors.hpp"
#include "navfly/log.hpp"

namespace navfly::world {

const TargetInstance& Scene::goal() const { return target_by_id(goal_target_id); }

const TargetInstance& Scene::target_by_id(int id) const {
  for (const auto& t : targets) {
    if (t.id == id) return t;
  }
  throw DomainError("no target with id " + std::to_string(id));
}

const std::vector<PoolEntry>& target_label_pool() {
  static const std::vector<PoolEntry> pool = [] {
    // 60 instances, color x object, mirroring a vehicles/furniture/street
    // mix. The last 10 are the held-out split.
    const std::array<const char*, 50> seen = {
        "red sports car",    "blue sports car",   "green pickup truck", "black pickup truck",
        "white sedan",       "yellow sedan",      "orange excavator",   "blue tractor",
        "red bicycle",       "green bicycle",     "black motorbike",    "white scooter",
        "black chair",       "red chair",         "blue chair",         "green bench",
        "brown bench",       "white bench",       "gray sofa",          "brown sofa",
        "purple armchair",   "yellow armchair",   "white picnic table", "brown picnic table",
        "red mailbox",       "blue mailbox",      "green dumpster",     "gray dumpster",
        "white statue",      "gray statue",       "black fountain",     "white fountain",
        "red phone booth",   "blue phone booth",  "yellow fire hydrant", "red fire hydrant",
        "green trash bin",   "blue trash bin",    "orange traffic cone", "yellow traffic cone",
        "brown horse",       "white horse",       "black cow",          "brown cow",
        "gray elephant",     "white goat",        "black dog",          "brown dog",
        "orange cat",        "gray cat",
    };
    const std::array<const char*, 10> unseen = {
        "purple sports car", "orange pickup truck", "purple bench",   "orange sofa",
        "green statue",      "purple mailbox",      "white bicycle",  "gray horse",
        "yellow dog",        "purple fountain",
    };
    std::vector<PoolEntry> p;
    p.reserve(60);
    for (const char* s : seen) p.push_back({s, true});
    for (const char* s : unseen) p.push_back({s, false});
    return p;
  }();
  return pool;
}

namespace {

constexpr double kTargetFootprint = 0.8;
constexpr double kTargetCenterHeight = 1.0;
constexpr int kPlacementRetries = 400;
constexpr int kSceneRetries = 32;

// Edge index: 0 = south (y=0), 1 = east, 2 = north, 3 = west.
Vec2 point_on_edge_band(Rng& rng, int edge, double side) {
  const double along = rng.uniform(kBoundaryBand, side - kBoundaryBand);
  const double depth = rng.uniform(0.8, kBoundaryBand - 0.5);
  switch (edge) {
    case 0: return {along, depth};
    case 1: return {side - depth, along};
    case 2: return {along, side - depth};
    default: return {depth, along};
  }
}

Rect2 edge_band_rect(int edge, double side) {
  switch (edge) {
    case 0: return {{0.0, 0.0}, {side, kBoundaryBand}};
    case 1: return {{side - kBoundaryBand, 0.0}, {side, side}};
    case 2: return {{0.0, side - kBoundaryBand}, {side, side}};
    default: return {{0.0, 0.0}, {kBoundaryBand, side}};
  }
}

bool in_boundary_band(const Vec2& p, double side) {
  return p.x() <= kBoundaryBand || p.y() <= kBoundaryBand || p.x() >= side - kBoundaryBand ||
         p.y() >= side - kBoundaryBand;
}

double obstacle_spawn_clearance(const Obstacle& o, const Rect2& zone) {
  // Distance from the footprint to the spawn rectangle; <= 0 means overlap.
  const Vec2 corners[4] = {zone.min,
                           {zone.max.x(), zone.min.y()},
                           zone.max,
                           {zone.min.x(), zone.max.y()}};
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    d = std::min(d, footprint_segment_distance(o, corners[i], corners[(i + 1) % 4]));
  }
  // Footprint fully inside the rectangle: segment distances stay positive.
  const auto bounds_center = [&]() -> Vec2 {
    if (const auto* c = std::get_if<Cylinder>(&o)) return {c->center.x(), c->center.y()};
    const auto& b = std::get<AxisBox>(o);
    return {0.5 * (b.min.x() + b.max.x()), 0.5 * (b.min.y() + b.max.y())};
  }();
  if (zone.contains(bounds_center)) return 0.0;
  return d;
}

Obstacle sample_obstacle(Rng& rng, double lo_x, double hi_x, double lo_y, double hi_y) {
  const double kind = rng.uniform();
  if (kind < 0.55) {  // pillar
    Cylinder c;
    c.radius = rng.uniform(0.6, 1.6);
    c.height = rng.uniform(3.0, 8.0);
    c.center = Vec3(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y), 0.0);
    return c;
  }
  if (kind < 0.8) {  // stacked boxes
    AxisBox b;
    const double w = rng.uniform(1.0, 3.0);
    const double d = rng.uniform(1.0, 3.0);
    const double h = rng.uniform(1.5, 5.0);
    const double x = rng.uniform(lo_x, hi_x);
    const double y = rng.uniform(lo_y, hi_y);
    b.min = Vec3(x - 0.5 * w, y - 0.5 * d, 0.0);
    b.max = Vec3(x + 0.5 * w, y + 0.5 * d, h);
    return b;
  }
  // tree: trunk-scale cylinder with a wider crown radius
  Cylinder c;
  c.radius = rng.uniform(1.2, 2.2);
  c.height = rng.uniform(4.0, 9.0);
  c.center = Vec3(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y), 0.0);
  return c;
}

bool overlap_ok(const Obstacle& cand, const std::vector<Obstacle>& placed) {
  for (const auto& o : placed) {
    const double inter = footprint_overlap_area(cand, o);
    if (inter <= 0.0) continue;
    const double smaller = std::min(footprint_area(cand), footprint_area(o));
    if (inter > 0.5 * smaller) return false;
  }
  return true;
}

Scene try_generate(std::uint64_t seed, const SceneParams& params, Rng& rng,
                   std::string& failure) {
  const double side = params.side_length;
  Scene scene;
  scene.id = seed;
  scene.rng_seed = seed;
  scene.side_length = side;

  if (params.target_count < 1) {
    throw ConstructionError("target_count must be >= 1");
  }

  // Goal on a random edge; spawn zone is the opposite edge band.
  const int goal_edge = static_cast<int>(rng.bounded(4));
  scene.spawn_zone = edge_band_rect((goal_edge + 2) % 4, side);

  const auto& pool = target_label_pool();
  std::vector<std::size_t> seen_ids, unseen_ids;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    (pool[i].seen ? seen_ids : unseen_ids).push_back(i);
  }
  const auto& goal_ids = params.goal_pool == TargetPool::kSeen ? seen_ids : unseen_ids;

  TargetInstance goal;
  goal.id = 0;
  goal.label = pool[goal_ids[rng.index(goal_ids.size())]].label;
  goal.seen_flag = params.goal_pool == TargetPool::kSeen;
  {
    const Vec2 p = point_on_edge_band(rng, goal_edge, side);
    goal.position = Vec3(p.x(), p.y(), kTargetCenterHeight);
  }
  goal.footprint_radius = kTargetFootprint;
  scene.targets.push_back(goal);
  scene.goal_target_id = 0;

  // Distractors anywhere on the boundary band except near the goal,
  // labels distinct from the goal and from each other.
  std::vector<std::size_t> distractor_ids = seen_ids;
  for (int t = 1; t < params.target_count; ++t) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      const int edge = static_cast<int>(rng.bounded(4));
      const Vec2 p = point_on_edge_band(rng, edge, side);
      bool clear = true;
      for (const auto& other : scene.targets) {
        if ((p - Vec2(other.position.x(), other.position.y())).norm() < 6.0) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      TargetInstance ti;
      ti.id = t;
      std::size_t pick = distractor_ids[rng.index(distractor_ids.size())];
      int guard = 0;
      while (pool[pick].label == goal.label && guard++ < 64) {
        pick = distractor_ids[rng.index(distractor_ids.size())];
      }
      bool dup = false;
      for (const auto& other : scene.targets) dup = dup || other.label == pool[pick].label;
      if (dup) continue;
      ti.label = pool[pick].label;
      ti.seen_flag = pool[pick].seen;
      ti.position = Vec3(p.x(), p.y(), kTargetCenterHeight);
      ti.footprint_radius = kTargetFootprint;
      scene.targets.push_back(ti);
      placed = true;
    }
    if (!placed) {
      failure = "distractor placement exhausted retries";
      return {};
    }
  }

  // Obstacles live in the interior so they never overlap the spawn zone
  // or crowd the boundary targets.
  const int n_obstacles =
      params.obstacle_count_min +
      static_cast<int>(rng.bounded(
          static_cast<std::uint64_t>(params.obstacle_count_max - params.obstacle_count_min + 1)));
  const double lo = kBoundaryBand + 2.0;
  const double hi = side - kBoundaryBand - 2.0;
  if (n_obstacles > 0 && hi <= lo) {
    failure = "scene too small for interior obstacles";
    return {};
  }
  for (int k = 0; k < n_obstacles; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      Obstacle cand = sample_obstacle(rng, lo, hi, lo, hi);
      if (obstacle_spawn_clearance(cand, scene.spawn_zone) <= 0.5) continue;
      if (!overlap_ok(cand, scene.obstacles)) continue;
      scene.obstacles.push_back(cand);
      placed = true;
    }
    if (!placed) {
      failure = "obstacle placement exhausted retries (overlap > 50% everywhere)";
      return {};
    }
  }

  if (!grid_reachable(scene)) {
    failure = "goal unreachable from spawn zone";
    return {};
  }
  failure.clear();
  return scene;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneParams& params) {
  Rng rng(Rng::mix(seed, 0xA11CE));
  std::string failure = "unknown";
  for (int attempt = 0; attempt < kSceneRetries; ++attempt) {
    Scene scene = try_generate(seed, params, rng, failure);
    if (failure.empty()) {
      const std::string problem = validate_scene(scene);
      if (!problem.empty()) throw ConstructionError("generated scene invalid: " + problem);
      return scene;
    }
  }
  throw ConstructionError("scene generation failed: " + failure);
}

std::string validate_scene(const Scene& scene) {
  const double side = scene.side_length;
  if (!(side > 2.0 * kBoundaryBand)) return "side_length too small";
  if (scene.targets.empty()) return "no targets";
  bool goal_found = false;
  for (const auto& t : scene.targets) {
    if (t.id == scene.goal_target_id) goal_found = true;
    if (t.footprint_radius <= 0.0) return "target footprint_radius <= 0";
    if (!in_boundary_band({t.position.x(), t.position.y()}, side)) {
      return "target " + std::to_string(t.id) + " off the boundary band";
    }
  }
  if (!goal_found) return "goal_target_id missing from targets";
  for (const auto& o : scene.obstacles) {
    if (const auto* c = std::get_if<Cylinder>(&o)) {
      if (c->radius <= 0.0 || c->height <= 0.0) return "cylinder with non-positive size";
    } else {
      const auto& b = std::get<AxisBox>(o);
      if (!(b.min.x() < b.max.x() && b.min.y() < b.max.y() && b.min.z() < b.max.z())) {
        return "box min !< max";
      }
    }
    if (obstacle_spawn_clearance(o, scene.spawn_zone) <= 0.0) {
      return "obstacle overlaps spawn zone";
    }
  }
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    for (std::size_t j = i + 1; j < scene.obstacles.size(); ++j) {
      const double inter = footprint_overlap_area(scene.obstacles[i], scene.obstacles[j]);
      const double smaller =
          std::min(footprint_area(scene.obstacles[i]), footprint_area(scene.obstacles[j]));
      if (inter > 0.5 * smaller + 1e-6) return "obstacles overlap more than 50%";
    }
  }
  if (!grid_reachable(scene)) return "goal unreachable from spawn zone";
  return {};
}

bool grid_reachable(const Scene& scene, double clearance) {
  const double cell = 0.5;
  const int n = static_cast<int>(std::ceil(scene.side_length / cell));
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(n) * n, 0);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p((ix + 0.5) * cell, (iy + 0.5) * cell);
      for (const auto& o : scene.obstacles) {
        if (footprint_signed_distance(o, p) <= clearance) {
          blocked[static_cast<std::size_t>(iy) * n + ix] = 1;
          break;
        }
      }
    }
  }
  const auto cell_of = [&](const Vec2& p) {
    const int ix = std::clamp(static_cast<int>(p.x() / cell), 0, n - 1);
    const int iy = std::clamp(static_cast<int>(p.y() / cell), 0, n - 1);
    return std::pair<int, int>(ix, iy);
  };

  std::vector<std::uint8_t> visited(blocked.size(), 0);
  std::deque<std::pair<int, int>> frontier;
  // Seed with every free cell of the spawn zone.
  const auto [sx0, sy0] = cell_of(scene.spawn_zone.min);
  const auto [sx1, sy1] = cell_of(scene.spawn_zone.max);
  for (int iy = sy0; iy <= sy1; ++iy) {
    for (int ix = sx0; ix <= sx1; ++ix) {
      const std::size_t idx = static_cast<std::size_t>(iy) * n + ix;
      if (!blocked[idx] && !visited[idx]) {
        visited[idx] = 1;
        frontier.emplace_back(ix, iy);
      }
    }
  }
  const auto& goal = scene.goal();
  const auto [gx, gy] = cell_of({goal.position.x(), goal.position.y()});
  while (!frontier.empty()) {
    const auto [x, y] = frontier.front();
    frontier.pop_front();
    if (std::abs(x - gx) <= 1 && std::abs(y - gy) <= 1) return true;
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
      const std::size_t idx = static_cast<std::size_t>(ny) * n + nx;
      if (blocked[idx] || visited[idx]) continue;
      visited[idx] = 1;
      frontier.emplace_back(nx, ny);
    }
  }
  return false;
}

namespace {

nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected 3-element array for vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

nlohmann::json to_json(const Scene& scene) {
  nlohmann::json j;
  j["schema"] = 1;
  j["id"] = scene.id;
  j["side_length"] = scene.side_length;
  j["rng_seed"] = scene.rng_seed;
  j["goal_target_id"] = scene.goal_target_id;
  j["spawn_zone"] = {{"min", {scene.spawn_zone.min.x(), scene.spawn_zone.min.y()}},
                     {"max", {scene.spawn_zone.max.x(), scene.spawn_zone.max.y()}}};
  auto obstacles = nlohmann::json::array();
  for (const auto& o : scene.obstacles) {
    if (const auto* c = std::get_if<Cylinder>(&o)) {
      obstacles.push_back({{"type", "cylinder"},
                           {"center", vec3_to_json(c->center)},
                           {"radius", c->radius},
                           {"height", c->height}});
    } else {
      const auto& b = std::get<AxisBox>(o);
      obstacles.push_back(
          {{"type", "box"}, {"min", vec3_to_json(b.min)}, {"max", vec3_to_json(b.max)}});
    }
  }
  j["obstacles"] = obstacles;
  auto targets = nlohmann::json::array();
  for (const auto& t : scene.targets) {
    targets.push_back({{"id", t.id},
                       {"label", t.label},
                       {"position", vec3_to_json(t.position)},
                       {"footprint_radius", t.footprint_radius},
                       {"seen", t.seen_flag}});
  }
  j["targets"] = targets;
  return j;
}

Scene scene_from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j["schema"].get<int>() != 1) {
    throw IoError("unsupported scene schema");
  }
  Scene scene;
  scene.id = j.at("id").get<std::uint64_t>();
  scene.side_length = j.at("side_length").get<double>();
  scene.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  scene.goal_target_id = j.at("goal_target_id").get<int>();
  const auto& sz = j.at("spawn_zone");
  scene.spawn_zone.min = Vec2(sz.at("min")[0].get<double>(), sz.at("min")[1].get<double>());
  scene.spawn_zone.max = Vec2(sz.at("max")[0].get<double>(), sz.at("max")[1].get<double>());
  for (const auto& oj : j.at("obstacles")) {
    const std::string type = oj.at("type").get<std::string>();
    if (type == "cylinder") {
      Cylinder c;
      c.center = vec3_from_json(oj.at("center"));
      c.radius = oj.at("radius").get<double>();
      c.height = oj.at("height").get<double>();
      scene.obstacles.emplace_back(c);
    } else if (type == "box") {
      AxisBox b;
      b.min = vec3_from_json(oj.at("min"));
      b.max = vec3_from_json(oj.at("max"));
      scene.obstacles.emplace_back(b);
    } else {
      throw IoError("unknown obstacle type: " + type);
    }
  }
  for (const auto& tj : j.at("targets")) {
    TargetInstance t;
    t.id = tj.at("id").get<int>();
    t.label = tj.at("label").get<std::string>();
    t.position = vec3_from_json(tj.at("position"));
    t.footprint_radius = tj.at("footprint_radius").get<double>();
    t.seen_flag = tj.at("seen").get<bool>();
    scene.targets.push_back(t);
  }
  return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out << to_json(scene).dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed scene JSON in " + path + ": " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace navfly::world
