#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navfly/episode.hpp"
#include "navfly/errors.hpp"
#include "navfly/trajectory.hpp"

namespace navfly::data {

struct VersionError : Error {
  explicit VersionError(const std::string& what) : Error("version", what) {}
};
struct TruncationError : Error {
  explicit TruncationError(const std::string& what) : Error("truncation", what) {}
};
struct ChecksumError : Error {
  explicit ChecksumError(const std::string& what) : Error("checksum", what) {}
};

/// Rolls one episode with the given policy and captures the full per-step
/// record. `keep_depth` drops the depth pixels (the index still records
/// frame shapes) for memory-bound in-process pipelines.
TrajectoryRecord collect_trajectory(const world::Scene& scene, policy::Policy& pol,
                                    const world::TargetInstance& goal,
                                    const std::string& instruction,
                                    const eval::EpisodeLimits& limits, Rng& rng,
                                    TrajectorySource source, std::uint64_t trajectory_id,
                                    bool keep_depth = true,
                                    const world::UavState* start = nullptr);

/// Dataset directory layout: index.jsonl (one trajectory header per line)
/// + depth.bin (f32 little-endian frames with an offset table in the
/// index) + meta.json. Writers are exclusive per directory.
class DatasetWriter {
 public:
  explicit DatasetWriter(const std::string& dir, nlohmann::json meta = {});
  ~DatasetWriter();
  void append(const TrajectoryRecord& record);
  void finalize();
  int count() const { return count_; }

 private:
  std::string dir_;
  std::ofstream index_;
  std::ofstream blob_;
  std::uint64_t blob_offset_ = 0;
  int count_ = 0;
  bool finalized_ = false;
  nlohmann::json meta_;
};

void write_dataset(const std::vector<TrajectoryRecord>& records, const std::string& dir,
                   nlohmann::json meta = {});
std::vector<TrajectoryRecord> read_dataset(const std::string& dir, bool load_depth = true);

struct DatasetStats {
  int trajectories = 0;
  long steps = 0;
  double mean_path_length_m = 0.0;
  double mean_instruction_words = 0.0;
  long avoidance_steps = 0;  // steps before the first target detection
  long seeking_steps = 0;
  int successes = 0;
  int collisions = 0;
  int timeouts = 0;
};

DatasetStats dataset_stats(const std::vector<TrajectoryRecord>& records);
nlohmann::json to_json(const DatasetStats& stats);

nlohmann::json outcome_to_json(const eval::EpisodeOutcome& o);
eval::EpisodeOutcome outcome_from_json(const nlohmann::json& j);

}  // namespace navfly::data
