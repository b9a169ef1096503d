#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "navfly/pipeline.hpp"
#include "navfly/sac.hpp"
#include "navfly/scene.hpp"

namespace navfly {

/// Every tunable in one JSON document, sectioned per module. Unknown keys
/// are rejected so typos fail loudly; the defaults reproduce the
/// acceptance settings.
struct RunConfig {
  world::SceneParams scene;
  sac::TrainConfig sac;
  struct DatasetSection {
    int max_steps = 300;
    double dt = 0.2;
    bool keep_depth = true;
  } dataset;
  struct RebalanceSection {
    double alpha = 0.0;
  } rebalance;
  struct EvalSection {
    eval::MetricsThresholds thresholds;
    int trials_per_condition = 30;
    int max_steps = 300;
    double dt = 0.2;
  } eval;
  struct NetSection {
    net::PipelineConfig pipeline{.vision_latency_ms = 55.0,
                                 .llm_latency_ms = 65.0,
                                 .ipc_overhead_ms = 20.0,
                                 .queue_capacity = 1};
    int downlink_timeout_ms = 500;
  } net;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

/// Minimal structural JSON-schema checker covering the subset the shipped
/// schemas use: type, properties, required, additionalProperties (bool),
/// items, enum. Returns true when `doc` conforms; otherwise fills `error`.
bool schema_check(const nlohmann::json& doc, const nlohmann::json& schema, std::string* error);

}  // namespace navfly
