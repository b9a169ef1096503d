#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "navfly/errors.hpp"
#include "navfly/planner.hpp"
#include "navfly/scene.hpp"

using namespace navfly;
using namespace navfly::world;

TEST_CASE("degenerate params: no obstacles, single target") {
  SceneParams params;
  params.obstacle_count_min = 0;
  params.obstacle_count_max = 0;
  params.target_count = 1;
  const Scene scene = generate_scene(0, params);
  CHECK(scene.obstacles.empty());
  CHECK(scene.targets.size() == 1);
  const auto& goal = scene.goal();
  const double side = scene.side_length;
  const bool on_band = goal.position.x() <= kBoundaryBand || goal.position.y() <= kBoundaryBand ||
                       goal.position.x() >= side - kBoundaryBand ||
                       goal.position.y() >= side - kBoundaryBand;
  CHECK(on_band);
  CHECK(validate_scene(scene).empty());
}

TEST_CASE("same seed gives byte-identical serialization") {
  SceneParams params;
  const Scene a = generate_scene(1234, params);
  const Scene b = generate_scene(1234, params);
  CHECK(to_json(a).dump() == to_json(b).dump());

  const Scene c = generate_scene(1235, params);
  CHECK(to_json(a).dump() != to_json(c).dump());
}

TEST_CASE("generated scenes satisfy every invariant") {
  SceneParams params;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene scene = generate_scene(seed, params);
    INFO("seed ", seed);
    CHECK(validate_scene(scene).empty());
    CHECK(scene.targets.size() == static_cast<std::size_t>(params.target_count));
    // distractor labels are distinct
    std::set<std::string> labels;
    for (const auto& t : scene.targets) labels.insert(t.label);
    CHECK(labels.size() == scene.targets.size());
  }
}

TEST_CASE("100-seed sweep passes the visibility-graph reachability oracle") {
  SceneParams params;
  int pass = 0;
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    const Scene scene = generate_scene(seed, params);
    const auto& goal = scene.goal();
    const Vec2 spawn_center = 0.5 * (scene.spawn_zone.min + scene.spawn_zone.max);
    const double len = eval::optimal_path_length(
        scene, spawn_center, {goal.position.x(), goal.position.y()});
    if (len > 0.0 && std::isfinite(len)) ++pass;
  }
  CHECK(pass == 100);
}

TEST_CASE("unseen goal pool flags the goal as held out") {
  SceneParams params;
  params.goal_pool = TargetPool::kUnseen;
  const Scene scene = generate_scene(77, params);
  CHECK_FALSE(scene.goal().seen_flag);
  // distractors still come from the train pool
  for (const auto& t : scene.targets) {
    if (t.id != scene.goal_target_id) CHECK(t.seen_flag);
  }
}

TEST_CASE("label pool is the documented 50/10 split") {
  const auto& pool = target_label_pool();
  CHECK(pool.size() == 60);
  int seen = 0;
  std::set<std::string> distinct;
  for (const auto& e : pool) {
    seen += e.seen ? 1 : 0;
    distinct.insert(e.label);
  }
  CHECK(seen == 50);
  CHECK(distinct.size() == 60);
}

TEST_CASE("save/load round trip") {
  const std::string path = (std::filesystem::temp_directory_path() / "navfly_scene_rt.json").string();
  const Scene a = generate_scene(9, {});
  save_scene(a, path);
  const Scene b = load_scene(path);
  CHECK(to_json(a).dump() == to_json(b).dump());
  std::filesystem::remove(path);
}

TEST_CASE("construction failure names the violated constraint") {
  SceneParams params;
  params.side_length = 12.0;  // no interior left once the bands are removed
  params.obstacle_count_min = 5;
  params.obstacle_count_max = 5;
  params.target_count = 1;
  CHECK_THROWS_AS(generate_scene(5, params), ConstructionError);
}

TEST_CASE("loading a wrong schema fails") {
  nlohmann::json j = to_json(generate_scene(3, {}));
  j["schema"] = 99;
  CHECK_THROWS_AS(scene_from_json(j), IoError);
}
