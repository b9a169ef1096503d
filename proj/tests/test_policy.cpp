#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "navfly/episode.hpp"
#include "navfly/policy.hpp"
#include "navfly/sensor.hpp"

using namespace navfly;
using namespace navfly::world;

namespace {

Scene scene_with_goal(const Vec3& goal_pos) {
  Scene scene;
  scene.side_length = 70.0;
  TargetInstance goal;
  goal.id = 0;
  goal.label = "red sports car";
  goal.position = goal_pos;
  scene.targets.push_back(goal);
  scene.goal_target_id = 0;
  scene.spawn_zone = {{0, 0}, {70, 5}};
  return scene;
}

policy::PolicyInput input_at(const Scene& scene, const Vec3& pos, double yaw) {
  policy::PolicyInput in;
  in.state.position = pos;
  in.state.yaw = yaw;
  in.depth = render_depth(scene, in.state);
  in.instruction = "reach the red sports car";
  in.goal_hint = 0.0;
  return in;
}

}  // namespace

TEST_CASE("unobstructed pursuit drives straight at the goal") {
  const Scene scene = scene_with_goal(Vec3(65, 35, 1));
  auto expert = policy::make_scripted_expert(scene, scene.goal());
  const auto out = expert->act(input_at(scene, Vec3(10, 35, 2), 0.0));
  CHECK(out.action.forward_mps > 0.0f);
  CHECK(std::abs(out.action.yaw_rate_radps) < 0.05f);
}

TEST_CASE("a wall filling the center FOV at 1.5 m slows and turns the expert") {
  Scene scene = scene_with_goal(Vec3(65, 35, 1));
  AxisBox wall;
  wall.min = Vec3(11.5, 15, 0);
  wall.max = Vec3(12.5, 55, 8);
  scene.obstacles.emplace_back(wall);
  auto expert = policy::make_scripted_expert(scene, scene.goal());
  const auto out = expert->act(input_at(scene, Vec3(10, 35, 2), 0.0));
  CHECK(out.action.forward_mps <= 0.5f);
  CHECK(std::abs(out.action.yaw_rate_radps) >= 0.3f);
}

TEST_CASE("expert is deterministic") {
  const Scene scene = scene_with_goal(Vec3(65, 30, 1));
  auto expert = policy::make_scripted_expert(scene, scene.goal());
  const auto in = input_at(scene, Vec3(20, 40, 2.4), 0.3);
  const auto a = expert->act(in);
  const auto b = expert->act(in);
  CHECK(a.action.forward_mps == b.action.forward_mps);
  CHECK(a.action.yaw_rate_radps == b.action.yaw_rate_radps);
  CHECK(a.action.vertical_mps == b.action.vertical_mps);
}

TEST_CASE("terminal alignment engages near a visible target") {
  const Scene scene = scene_with_goal(Vec3(40, 35, 1));
  auto expert = policy::make_scripted_expert(scene, scene.goal());
  // 6 m out, target visible, slightly misaligned
  const auto out = expert->act(input_at(scene, Vec3(34, 35, 2), 0.2));
  CHECK(out.action.forward_mps <= 1.5f);
  CHECK(out.action.yaw_rate_radps < 0.0f);  // steering back toward bearing 0
}

TEST_CASE("expert holds cruise altitude") {
  const Scene scene = scene_with_goal(Vec3(65, 35, 1));
  auto expert = policy::make_scripted_expert(scene, scene.goal());
  CHECK(expert->act(input_at(scene, Vec3(10, 35, 1.0), 0.0)).action.vertical_mps > 0.5f);
  CHECK(expert->act(input_at(scene, Vec3(10, 35, 4.0), 0.0)).action.vertical_mps < -0.5f);
}

TEST_CASE("expert stays safe across seeded episodes on generated scenes") {
  // Quality gate smoke version: the full 500-episode run lives in the
  // acceptance suite.
  SceneParams params;
  params.obstacle_count_min = 6;
  params.obstacle_count_max = 12;
  int collisions = 0;
  const int episodes = 40;
  for (int i = 0; i < episodes; ++i) {
    const Scene scene = generate_scene(3000 + i / 4, params);
    auto expert = policy::make_scripted_expert(scene, scene.goal());
    Rng rng(Rng::mix(99, i));
    const auto outcome =
        eval::run_episode(scene, *expert, scene.goal(), {300, 0.2}, rng);
    if (outcome.termination == eval::Termination::kCollision) ++collisions;
  }
  CHECK(collisions <= 2);
}
