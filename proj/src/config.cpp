#include "navfly/config.hpp"

#include <fstream>
#include <set>

#include "navfly/errors.hpp"

namespace navfly {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  check_keys(j, {"scene", "sac", "dataset", "rebalance", "eval", "net"}, "config root");

  if (j.contains("scene")) {
    const auto& s = j["scene"];
    check_keys(s, {"side_length", "obstacle_count_min", "obstacle_count_max", "target_count"},
               "scene");
    get_if_present(s, "side_length", cfg.scene.side_length);
    get_if_present(s, "obstacle_count_min", cfg.scene.obstacle_count_min);
    get_if_present(s, "obstacle_count_max", cfg.scene.obstacle_count_max);
    get_if_present(s, "target_count", cfg.scene.target_count);
  }
  if (j.contains("sac")) {
    const auto& s = j["sac"];
    check_keys(s,
               {"gamma", "polyak", "lr_actor", "lr_critic", "lr_alpha", "batch_size",
                "target_entropy", "initial_alpha", "hidden", "replay_capacity", "warmup_steps",
                "train_after", "train_every", "max_env_steps", "eval_interval", "eval_episodes",
                "stop_success_rate", "reward"},
               "sac");
    auto& c = cfg.sac.sac;
    get_if_present(s, "gamma", c.gamma);
    get_if_present(s, "polyak", c.polyak);
    get_if_present(s, "lr_actor", c.lr_actor);
    get_if_present(s, "lr_critic", c.lr_critic);
    get_if_present(s, "lr_alpha", c.lr_alpha);
    get_if_present(s, "batch_size", c.batch_size);
    get_if_present(s, "target_entropy", c.target_entropy);
    get_if_present(s, "initial_alpha", c.initial_alpha);
    get_if_present(s, "hidden", c.hidden);
    get_if_present(s, "replay_capacity", c.replay_capacity);
    get_if_present(s, "warmup_steps", c.warmup_steps);
    get_if_present(s, "train_after", c.train_after);
    get_if_present(s, "train_every", c.train_every);
    get_if_present(s, "max_env_steps", cfg.sac.max_env_steps);
    get_if_present(s, "eval_interval", cfg.sac.eval_interval);
    get_if_present(s, "eval_episodes", cfg.sac.eval_episodes);
    get_if_present(s, "stop_success_rate", cfg.sac.stop_success_rate);
    if (s.contains("reward")) {
      const auto& r = s["reward"];
      check_keys(r, {"progress_gain", "step_penalty", "collision_penalty", "success_bonus"},
                 "sac.reward");
      get_if_present(r, "progress_gain", cfg.sac.reward.progress_gain);
      get_if_present(r, "step_penalty", cfg.sac.reward.step_penalty);
      get_if_present(r, "collision_penalty", cfg.sac.reward.collision_penalty);
      get_if_present(r, "success_bonus", cfg.sac.reward.success_bonus);
    }
    if (c.gamma <= 0.0 || c.gamma >= 1.0) throw ConfigError("sac.gamma must be in (0,1)");
    if (c.polyak <= 0.0 || c.polyak >= 1.0) throw ConfigError("sac.polyak must be in (0,1)");
  }
  if (j.contains("dataset")) {
    const auto& s = j["dataset"];
    check_keys(s, {"max_steps", "dt", "keep_depth"}, "dataset");
    get_if_present(s, "max_steps", cfg.dataset.max_steps);
    get_if_present(s, "dt", cfg.dataset.dt);
    get_if_present(s, "keep_depth", cfg.dataset.keep_depth);
  }
  if (j.contains("rebalance")) {
    const auto& s = j["rebalance"];
    check_keys(s, {"alpha"}, "rebalance");
    get_if_present(s, "alpha", cfg.rebalance.alpha);
    if (cfg.rebalance.alpha < 0.0 || cfg.rebalance.alpha > 1.0) {
      throw ConfigError("rebalance.alpha must be in [0,1]");
    }
  }
  if (j.contains("eval")) {
    const auto& s = j["eval"];
    check_keys(s, {"d_tau_m", "theta_tau_deg", "d_col_m", "count_timeouts",
                   "trials_per_condition", "max_steps", "dt"},
               "eval");
    get_if_present(s, "d_tau_m", cfg.eval.thresholds.d_tau_m);
    if (s.contains("theta_tau_deg")) {
      cfg.eval.thresholds.theta_tau_rad = s["theta_tau_deg"].get<double>() * M_PI / 180.0;
    }
    get_if_present(s, "d_col_m", cfg.eval.thresholds.d_col_m);
    get_if_present(s, "count_timeouts", cfg.eval.thresholds.count_timeouts);
    get_if_present(s, "trials_per_condition", cfg.eval.trials_per_condition);
    get_if_present(s, "max_steps", cfg.eval.max_steps);
    get_if_present(s, "dt", cfg.eval.dt);
  }
  if (j.contains("net")) {
    const auto& s = j["net"];
    check_keys(s, {"vision_latency_ms", "llm_latency_ms", "ipc_overhead_ms", "queue_capacity",
                   "downlink_timeout_ms"},
               "net");
    get_if_present(s, "vision_latency_ms", cfg.net.pipeline.vision_latency_ms);
    get_if_present(s, "llm_latency_ms", cfg.net.pipeline.llm_latency_ms);
    get_if_present(s, "ipc_overhead_ms", cfg.net.pipeline.ipc_overhead_ms);
    get_if_present(s, "queue_capacity", cfg.net.pipeline.queue_capacity);
    get_if_present(s, "downlink_timeout_ms", cfg.net.downlink_timeout_ms);
    if (cfg.net.pipeline.vision_latency_ms < 0.0 || cfg.net.pipeline.llm_latency_ms < 0.0 ||
        cfg.net.pipeline.ipc_overhead_ms < 0.0) {
      throw ConfigError("net latencies must be >= 0");
    }
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  return json{
      {"scene",
       {{"side_length", cfg.scene.side_length},
        {"obstacle_count_min", cfg.scene.obstacle_count_min},
        {"obstacle_count_max", cfg.scene.obstacle_count_max},
        {"target_count", cfg.scene.target_count}}},
      {"sac",
       {{"gamma", cfg.sac.sac.gamma},
        {"polyak", cfg.sac.sac.polyak},
        {"lr_actor", cfg.sac.sac.lr_actor},
        {"lr_critic", cfg.sac.sac.lr_critic},
        {"lr_alpha", cfg.sac.sac.lr_alpha},
        {"batch_size", cfg.sac.sac.batch_size},
        {"target_entropy", cfg.sac.sac.target_entropy},
        {"initial_alpha", cfg.sac.sac.initial_alpha},
        {"hidden", cfg.sac.sac.hidden},
        {"replay_capacity", cfg.sac.sac.replay_capacity},
        {"warmup_steps", cfg.sac.sac.warmup_steps},
        {"train_after", cfg.sac.sac.train_after},
        {"train_every", cfg.sac.sac.train_every},
        {"max_env_steps", cfg.sac.max_env_steps},
        {"eval_interval", cfg.sac.eval_interval},
        {"eval_episodes", cfg.sac.eval_episodes},
        {"stop_success_rate", cfg.sac.stop_success_rate},
        {"reward",
         {{"progress_gain", cfg.sac.reward.progress_gain},
          {"step_penalty", cfg.sac.reward.step_penalty},
          {"collision_penalty", cfg.sac.reward.collision_penalty},
          {"success_bonus", cfg.sac.reward.success_bonus}}}}},
      {"dataset",
       {{"max_steps", cfg.dataset.max_steps},
        {"dt", cfg.dataset.dt},
        {"keep_depth", cfg.dataset.keep_depth}}},
      {"rebalance", {{"alpha", cfg.rebalance.alpha}}},
      {"eval",
       {{"d_tau_m", cfg.eval.thresholds.d_tau_m},
        {"theta_tau_deg", cfg.eval.thresholds.theta_tau_rad * 180.0 / M_PI},
        {"d_col_m", cfg.eval.thresholds.d_col_m},
        {"count_timeouts", cfg.eval.thresholds.count_timeouts},
        {"trials_per_condition", cfg.eval.trials_per_condition},
        {"max_steps", cfg.eval.max_steps},
        {"dt", cfg.eval.dt}}},
      {"net",
       {{"vision_latency_ms", cfg.net.pipeline.vision_latency_ms},
        {"llm_latency_ms", cfg.net.pipeline.llm_latency_ms},
        {"ipc_overhead_ms", cfg.net.pipeline.ipc_overhead_ms},
        {"queue_capacity", cfg.net.pipeline.queue_capacity},
        {"downlink_timeout_ms", cfg.net.downlink_timeout_ms}}}};
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config JSON: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

namespace {

bool type_matches(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "number") return doc.is_number();
  if (type == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

bool check_node(const json& doc, const json& schema, const std::string& path, std::string* error) {
  const auto fail = [&](const std::string& why) {
    if (error) *error = path + ": " + why;
    return false;
  };
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_array()) {
      for (const auto& alt : t) ok = ok || type_matches(doc, alt.get<std::string>());
    } else {
      ok = type_matches(doc, t.get<std::string>());
    }
    if (!ok) return fail("type mismatch (want " + t.dump() + ")");
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& v : schema["enum"]) ok = ok || v == doc;
    if (!ok) return fail("value not in enum");
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) {
          return fail("missing required key \"" + key.get<std::string>() + "\"");
        }
      }
    }
    const json props = schema.value("properties", json::object());
    for (const auto& [key, sub] : props.items()) {
      if (doc.contains(key)) {
        if (!check_node(doc.at(key), sub, path + "/" + key, error)) return false;
      }
    }
    if (schema.value("additionalProperties", true) == false) {
      for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!props.contains(key)) return fail("unexpected key \"" + key + "\"");
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const auto& item : doc) {
      if (!check_node(item, schema["items"], path + "/" + std::to_string(i), error)) return false;
      ++i;
    }
  }
  return true;
}

}  // namespace

bool schema_check(const json& doc, const json& schema, std::string* error) {
  return check_node(doc, schema, "$", error);
}

}  // namespace navfly
