#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "navfly/config.hpp"
#include "navfly/dataset.hpp"
#include "navfly/episode.hpp"
#include "navfly/instructions.hpp"
#include "navfly/log.hpp"
#include "navfly/net.hpp"
#include "navfly/planner.hpp"
#include "navfly/policy.hpp"
#include "navfly/rebalance.hpp"
#include "navfly/sac.hpp"
#include "navfly/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace navfly;

namespace {

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for write: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

RunConfig config_from_flag(const std::string& config_path) {
  if (config_path.empty()) return RunConfig{};
  return load_run_config(config_path);
}

std::vector<world::Scene> load_scene_dir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json" && entry.path().filename() != "meta.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no scene .json files in " + dir);
  std::vector<world::Scene> scenes;
  for (const auto& f : files) scenes.push_back(world::load_scene(f.string()));
  return scenes;
}

/// Policy SPEC grammar: "expert" or "sac:<checkpoint path>".
struct PolicySpec {
  enum class Kind { kExpert, kSac } kind = Kind::kExpert;
  std::string checkpoint;
};

PolicySpec parse_policy_spec(const std::string& spec) {
  if (spec == "expert") return {PolicySpec::Kind::kExpert, {}};
  if (spec.rfind("sac:", 0) == 0) {
    PolicySpec p{PolicySpec::Kind::kSac, spec.substr(4)};
    if (p.checkpoint.empty()) throw ConfigError("sac policy spec needs a checkpoint path");
    return p;
  }
  throw ConfigError("unknown policy spec \"" + spec + "\" (use expert | sac:CHECKPOINT)");
}

eval::PolicyFactory make_policy_factory(const PolicySpec& spec, bool deterministic,
                                        std::uint64_t seed) {
  if (spec.kind == PolicySpec::Kind::kExpert) {
    return [](const world::Scene& scene, const world::TargetInstance& goal) {
      return policy::make_scripted_expert(scene, goal);
    };
  }
  auto agent = std::make_shared<sac::SacAgent>(sac::load_checkpoint(spec.checkpoint));
  return [agent, deterministic, seed](const world::Scene& scene,
                                      const world::TargetInstance& goal) {
    (void)scene;
    return std::make_unique<sac::SacPolicy>(agent->actor, goal.position, deterministic,
                                            Rng::mix(seed, goal.id));
  };
}

std::pair<std::string, std::uint16_t> parse_host_port(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ConfigError("address must be HOST:PORT: " + addr);
  const int port = std::stoi(addr.substr(colon + 1));
  if (port < 0 || port > 65535) throw ConfigError("port out of range in " + addr);
  return {addr.substr(0, colon), static_cast<std::uint16_t>(port)};
}

// ---------------------------------------------------------------------------

int cmd_gen_scenes(int count, std::uint64_t seed, const std::string& out_dir,
                   const RunConfig& cfg, bool unseen_targets) {
  fs::create_directories(out_dir);
  world::SceneParams params = cfg.scene;
  params.goal_pool = unseen_targets ? world::TargetPool::kUnseen : world::TargetPool::kSeen;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t scene_seed = seed + static_cast<std::uint64_t>(i);
    const world::Scene scene = world::generate_scene(scene_seed, params);
    char name[64];
    std::snprintf(name, sizeof(name), "scene_%06llu.json",
                  static_cast<unsigned long long>(scene_seed));
    world::save_scene(scene, out_dir + "/" + name);
  }
  std::cout << json{{"generated", count}, {"out", out_dir}}.dump() << "\n";
  return 0;
}

int cmd_train_agent(const std::string& scene_path, int steps, const std::string& out_path,
                    std::uint64_t seed, const RunConfig& cfg, const std::string& diag_path,
                    int jobs) {
  const world::Scene scene = world::load_scene(scene_path);
  sac::TrainConfig train = cfg.sac;
  if (steps > 0) train.max_env_steps = steps;
  train.jobs = jobs;
  const sac::TrainResult result = sac::train_agent(scene, train, seed);
  sac::save_checkpoint(result.agent, out_path);
  if (!diag_path.empty()) {
    std::ofstream diag(diag_path, std::ios::binary | std::ios::trunc);
    for (const auto& row : result.diagnostics) {
      diag << json{{"env_steps", row.env_steps},
                   {"critic_loss", row.critic_loss},
                   {"actor_loss", row.actor_loss},
                   {"alpha", row.alpha},
                   {"mean_q", row.mean_q},
                   {"recent_return", row.recent_return},
                   {"eval_success", row.eval_success}}
                  .dump()
           << "\n";
    }
  }
  std::cout << json{{"scene", scene.id},
                    {"env_steps", result.env_steps},
                    {"final_eval_success", result.final_eval_success},
                    {"checkpoint", out_path}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_collect(const std::string& scene_path, const std::string& policy_spec, int episodes,
                const std::string& out_dir, std::uint64_t seed, const RunConfig& cfg, int jobs) {
  const world::Scene scene = world::load_scene(scene_path);
  const PolicySpec spec = parse_policy_spec(policy_spec);
  // The SAC source rolls its stochastic policy, the paper's collection
  // setup; the expert is deterministic.
  const bool deterministic = spec.kind == PolicySpec::Kind::kExpert;
  const auto factory = make_policy_factory(spec, deterministic, seed);
  const eval::EpisodeLimits limits{cfg.dataset.max_steps, cfg.dataset.dt};

  std::vector<data::TrajectoryRecord> records(static_cast<std::size_t>(episodes));
  eval::parallel_for(static_cast<std::size_t>(episodes), jobs, [&](std::size_t i) {
    Rng rng(Rng::mix(seed, i));
    auto pol = factory(scene, scene.goal());
    const std::string instruction = data::make_instruction(rng, scene.goal(), scene);
    records[i] = data::collect_trajectory(
        scene, *pol, scene.goal(), instruction, limits, rng,
        spec.kind == PolicySpec::Kind::kExpert ? data::TrajectorySource::kScriptedExpert
                                               : data::TrajectorySource::kSacAgent,
        Rng::mix(seed, 0xD5) + i, cfg.dataset.keep_depth);
  });

  json meta{{"scene", scene.id},
            {"policy", policy_spec},
            {"seed", seed},
            {"episodes", episodes},
            {"reward_config",
             {{"progress_gain", cfg.sac.reward.progress_gain},
              {"step_penalty", cfg.sac.reward.step_penalty},
              {"collision_penalty", cfg.sac.reward.collision_penalty},
              {"success_bonus", cfg.sac.reward.success_bonus}}}};
  data::write_dataset(records, out_dir, meta);
  const auto stats = data::dataset_stats(records);
  std::cout << json{{"out", out_dir}, {"stats", data::to_json(stats)}}.dump() << "\n";
  return 0;
}

int cmd_stats(const std::string& data_dir, const std::string& out_path) {
  const auto records = data::read_dataset(data_dir, /*load_depth=*/false);
  const json j = data::to_json(data::dataset_stats(records));
  if (!out_path.empty()) write_json_file(j, out_path);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_rebalance(const std::string& data_dir, double alpha, std::uint64_t seed,
                  const std::string& out_dir, const std::string& report_path) {
  const auto records = data::read_dataset(data_dir, /*load_depth=*/false);
  const auto plan = rebalance::make_plan(records, alpha);
  Rng rng(Rng::mix(seed, 0x2EBA));
  const auto rebalanced = rebalance::stratified_resample(records, plan, rng);
  const json report = rebalance::rebalance_report(records, rebalanced);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/resampled.jsonl", std::ios::binary | std::ios::trunc);
    for (const auto& s : rebalanced.samples) {
      out << json{{"trajectory_id", s.trajectory_id},
                  {"step_begin", s.step_begin},
                  {"step_end", s.step_end},
                  {"phase", s.label == rebalance::PhaseLabel::kAvoidance ? 1 : 2}}
                 .dump()
          << "\n";
    }
    if (!out) throw IoError("cannot write resampled.jsonl in " + out_dir);
    write_json_file(report, out_dir + "/report.json");
  }
  if (!report_path.empty()) write_json_file(report, report_path);
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_eval(const std::string& scenes_dir, const std::string& policy_spec, int trials,
             std::uint64_t seed, const std::string& report_path, const std::string& csv_path,
             const RunConfig& cfg, int jobs) {
  eval::SplitConfig split;
  split.trials_per_condition = trials;
  split.base_seed = seed;
  split.limits = {cfg.eval.max_steps, cfg.eval.dt};
  split.thresholds = cfg.eval.thresholds;
  split.jobs = jobs;
  split.seen_scenes = load_scene_dir(scenes_dir);
  // Unseen scenes are fresh layouts generated from the evaluation seed.
  for (int i = 0; i < 2; ++i) {
    split.unseen_scenes.push_back(
        world::generate_scene(Rng::mix(seed, 0xF00D + i), cfg.scene));
  }
  split.make_policy = make_policy_factory(parse_policy_spec(policy_spec), true, seed);

  const eval::MetricsReport report = eval::run_split_evaluation(split);
  const json j = to_json(report);
  if (!report_path.empty()) write_json_file(j, report_path);
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    csv << "condition,n,sr,cr,per\n";
    const auto row = [&csv](const std::string& name, const eval::MetricsCell& cell) {
      csv << name << "," << cell.n << "," << cell.sr << "," << cell.cr << ","
          << (cell.per ? std::to_string(*cell.per) : "") << "\n";
    };
    for (const auto& [name, cell] : report.conditions) row(name, cell);
    row("overall", report.overall);
    if (!csv) throw IoError("cannot write csv: " + csv_path);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

std::unique_ptr<net::PolicyServer> g_server;

int cmd_serve(const std::string& bind_addr, std::uint16_t port, const std::string& policy_spec,
              const std::string& scene_path, int goal_id, const RunConfig& cfg) {
  const PolicySpec spec = parse_policy_spec(policy_spec);
  std::shared_ptr<world::Scene> scene;
  if (!scene_path.empty()) scene = std::make_shared<world::Scene>(world::load_scene(scene_path));
  if (spec.kind == PolicySpec::Kind::kExpert && !scene) {
    throw ConfigError("serve --policy expert requires --scene");
  }
  std::shared_ptr<sac::SacAgent> agent;
  if (spec.kind == PolicySpec::Kind::kSac) {
    agent = std::make_shared<sac::SacAgent>(sac::load_checkpoint(spec.checkpoint));
  }

  net::SessionPolicyFactory factory =
      [spec, scene, agent, goal_id](const net::SessionInitPayload& init)
      -> std::unique_ptr<policy::Policy> {
    (void)init;
    if (spec.kind == PolicySpec::Kind::kExpert) {
      const auto& goal = goal_id >= 0 ? scene->target_by_id(goal_id) : scene->goal();
      return policy::make_scripted_expert(*scene, goal);
    }
    std::optional<world::Vec3> goal_pos;
    if (scene) {
      goal_pos = (goal_id >= 0 ? scene->target_by_id(goal_id) : scene->goal()).position;
    }
    return std::make_unique<sac::SacPolicy>(agent->actor, goal_pos, /*deterministic=*/true, 0);
  };

  g_server = std::make_unique<net::PolicyServer>(bind_addr, port, std::move(factory),
                                                 cfg.net.pipeline);
  std::cout << json{{"listening", bind_addr + ":" + std::to_string(g_server->port())}}.dump()
            << std::endl;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  // Serve until interrupted.
  for (;;) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  return 0;
}

int cmd_fly(const std::string& server_addr, const std::string& scene_path, int goal_id,
            std::uint64_t seed, const std::string& instruction, const RunConfig& cfg) {
  const auto [host, port] = parse_host_port(server_addr);
  const world::Scene scene = world::load_scene(scene_path);
  const auto& goal = goal_id >= 0 ? scene.target_by_id(goal_id) : scene.goal();
  Rng rng(Rng::mix(seed, 0xF1));
  std::string instr = instruction;
  if (instr.empty()) {
    Rng instr_rng(Rng::mix(seed, 0x115));
    instr = data::make_instruction(instr_rng, goal, scene);
  }
  const eval::EpisodeLimits limits{cfg.eval.max_steps, cfg.eval.dt};
  const auto outcome =
      net::fly_client(host, port, scene, goal, instr, limits, rng, cfg.net.downlink_timeout_ms);
  std::cout << data::outcome_to_json(outcome).dump(2) << "\n";
  return outcome.termination == eval::Termination::kAborted ? 1 : 0;
}

int cmd_bench_pipeline(int frames, const RunConfig& cfg, const std::string& report_path) {
  const json report = net::bench_pipeline(cfg.net.pipeline, frames);
  if (!report_path.empty()) write_json_file(report, report_path);
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navfly: procedural UAV navigation workbench"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "RunConfig JSON file")->capture_default_str();

  // gen-scenes
  auto* gen = app.add_subcommand("gen-scenes", "generate procedural scenes");
  int gen_count = 1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  bool gen_unseen = false;
  gen->add_option("--count", gen_count, "number of scenes")->required();
  gen->add_option("--seed", gen_seed, "base seed")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_flag("--unseen-targets", gen_unseen, "draw goals from the held-out target pool");

  // train-agent
  auto* train = app.add_subcommand("train-agent", "train a SAC collection agent on one scene");
  std::string train_scene, train_out, train_diag;
  int train_steps = 0;
  std::uint64_t train_seed = 0;
  int train_jobs = 0;
  train->add_option("--scene", train_scene, "scene JSON file")->required();
  train->add_option("--steps", train_steps, "max environment steps (0 = config default)");
  train->add_option("--out", train_out, "checkpoint output path")->required();
  train->add_option("--seed", train_seed, "training seed")->required();
  train->add_option("--diagnostics", train_diag, "write per-interval diagnostics JSONL");
  train->add_option("--jobs", train_jobs, "evaluation worker count (0 = all cores)");

  // collect
  auto* collect = app.add_subcommand("collect", "roll trajectories into a dataset");
  std::string col_scene, col_policy = "expert", col_out;
  int col_episodes = 0;
  std::uint64_t col_seed = 0;
  int col_jobs = 0;
  collect->add_option("--scene", col_scene, "scene JSON file")->required();
  collect->add_option("--policy", col_policy, "expert | sac:CHECKPOINT");
  collect->add_option("--episodes", col_episodes, "episode count")->required();
  collect->add_option("--out", col_out, "dataset output directory")->required();
  collect->add_option("--seed", col_seed, "collection seed")->required();
  collect->add_option("--jobs", col_jobs, "worker count (0 = all cores)");

  // stats
  auto* stats = app.add_subcommand("stats", "dataset statistics report");
  std::string stats_data, stats_out;
  stats->add_option("--data", stats_data, "dataset directory")->required();
  stats->add_option("--out", stats_out, "write report JSON here too");

  // rebalance
  auto* rb = app.add_subcommand("rebalance", "phase segmentation + stratified resampling");
  std::string rb_data, rb_out, rb_report;
  double rb_alpha = 0.0;
  std::uint64_t rb_seed = 0;
  rb->add_option("--data", rb_data, "dataset directory")->required();
  rb->add_option("--alpha", rb_alpha, "per-phase blend toward the original distribution [0,1]");
  rb->add_option("--seed", rb_seed, "resampling seed")->required();
  rb->add_option("--out", rb_out, "write resampled.jsonl + report.json here");
  rb->add_option("--report", rb_report, "write the report JSON here");

  // eval
  auto* ev = app.add_subcommand("eval", "2x2 seen/unseen split evaluation");
  std::string ev_scenes, ev_policy = "expert", ev_report, ev_csv;
  int ev_trials = 30;
  std::uint64_t ev_seed = 0;
  int ev_jobs = 0;
  ev->add_option("--scenes", ev_scenes, "directory of seen-scene JSON files")->required();
  ev->add_option("--policy", ev_policy, "expert | sac:CHECKPOINT");
  ev->add_option("--trials", ev_trials, "trials per condition");
  ev->add_option("--seed", ev_seed, "evaluation seed")->required();
  ev->add_option("--report", ev_report, "report JSON path");
  ev->add_option("--csv", ev_csv, "optional CSV export");
  ev->add_option("--jobs", ev_jobs, "worker count (0 = all cores)");

  // serve
  auto* serve = app.add_subcommand("serve", "run the policy server");
  std::string srv_bind = "127.0.0.1", srv_policy = "expert", srv_scene;
  std::uint16_t srv_port = 0;
  int srv_goal = -1;
  double srv_vision = -1.0, srv_llm = -1.0, srv_ipc = -1.0;
  serve->add_option("--bind", srv_bind, "bind address");
  serve->add_option("--port", srv_port, "port (0 = ephemeral)");
  serve->add_option("--policy", srv_policy, "expert | sac:CHECKPOINT");
  serve->add_option("--scene", srv_scene, "scene JSON (required for expert)");
  serve->add_option("--goal", srv_goal, "goal target id (-1 = scene default)");
  serve->add_option("--vision-ms", srv_vision, "vision stage latency");
  serve->add_option("--llm-ms", srv_llm, "llm stage latency");
  serve->add_option("--ipc-ms", srv_ipc, "inter-process hop latency");

  // fly
  auto* fly = app.add_subcommand("fly", "drive an episode against a remote server");
  std::string fly_server, fly_scene, fly_instruction;
  int fly_goal = -1;
  std::uint64_t fly_seed = 0;
  fly->add_option("--server", fly_server, "HOST:PORT")->required();
  fly->add_option("--scene", fly_scene, "scene JSON file")->required();
  fly->add_option("--goal", fly_goal, "goal target id (-1 = scene default)");
  fly->add_option("--seed", fly_seed, "episode seed")->required();
  fly->add_option("--instruction", fly_instruction, "override the templated instruction");

  // bench-pipeline
  auto* bench = app.add_subcommand("bench-pipeline", "latency/throughput model benchmark");
  int bench_frames = 200;
  std::string bench_report;
  double bench_vision = -1.0, bench_llm = -1.0, bench_ipc = -1.0;
  bench->add_option("--frames", bench_frames, "frames per mode");
  bench->add_option("--vision-ms", bench_vision, "vision stage latency");
  bench->add_option("--llm-ms", bench_llm, "llm stage latency");
  bench->add_option("--ipc-ms", bench_ipc, "inter-process hop latency");
  bench->add_option("--report", bench_report, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // exit 0 with usage text
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg = config_from_flag(config_path);
    if (gen->parsed()) return cmd_gen_scenes(gen_count, gen_seed, gen_out, cfg, gen_unseen);
    if (train->parsed()) {
      return cmd_train_agent(train_scene, train_steps, train_out, train_seed, cfg, train_diag,
                             train_jobs);
    }
    if (collect->parsed()) {
      return cmd_collect(col_scene, col_policy, col_episodes, col_out, col_seed, cfg, col_jobs);
    }
    if (stats->parsed()) return cmd_stats(stats_data, stats_out);
    if (rb->parsed()) return cmd_rebalance(rb_data, rb_alpha, rb_seed, rb_out, rb_report);
    if (ev->parsed()) {
      return cmd_eval(ev_scenes, ev_policy, ev_trials, ev_seed, ev_report, ev_csv, cfg, ev_jobs);
    }
    if (serve->parsed()) {
      if (srv_vision >= 0.0) cfg.net.pipeline.vision_latency_ms = srv_vision;
      if (srv_llm >= 0.0) cfg.net.pipeline.llm_latency_ms = srv_llm;
      if (srv_ipc >= 0.0) cfg.net.pipeline.ipc_overhead_ms = srv_ipc;
      return cmd_serve(srv_bind, srv_port, srv_policy, srv_scene, srv_goal, cfg);
    }
    if (fly->parsed()) {
      return cmd_fly(fly_server, fly_scene, fly_goal, fly_seed, fly_instruction, cfg);
    }
    if (bench->parsed()) {
      if (bench_vision >= 0.0) cfg.net.pipeline.vision_latency_ms = bench_vision;
      if (bench_llm >= 0.0) cfg.net.pipeline.llm_latency_ms = bench_llm;
      if (bench_ipc >= 0.0) cfg.net.pipeline.ipc_overhead_ms = bench_ipc;
      return cmd_bench_pipeline(bench_frames, cfg, bench_report);
    }
  } catch (const Error& e) {
    std::cerr << "NAVFLY_ERROR " << e.category() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "NAVFLY_ERROR internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
