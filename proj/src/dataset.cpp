#include "navfly/dataset.hpp"

#include <cstring>
#include <filesystem>

#include "navfly/crc32.hpp"
#include "navfly/instructions.hpp"

namespace navfly::data {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(TrajectorySource s) {
  return s == TrajectorySource::kSacAgent ? "sac_agent" : "scripted_expert";
}

TrajectorySource source_from_string(const std::string& s) {
  if (s == "sac_agent") return TrajectorySource::kSacAgent;
  if (s == "scripted_expert") return TrajectorySource::kScriptedExpert;
  throw DomainError("unknown trajectory source: " + s);
}

TrajectoryRecord collect_trajectory(const world::Scene& scene, policy::Policy& pol,
                                    const world::TargetInstance& goal,
                                    const std::string& instruction,
                                    const eval::EpisodeLimits& limits, Rng& rng,
                                    TrajectorySource source, std::uint64_t trajectory_id,
                                    bool keep_depth, const world::UavState* start) {
  TrajectoryRecord record;
  record.id = trajectory_id;
  record.scene_id = scene.id;
  record.instruction = instruction;
  record.goal_target_id = goal.id;
  record.source = source;

  const auto sink = [&record, keep_depth](const eval::StepSnapshot& snap) {
    StepRecord step;
    step.t = snap.t;
    step.state = snap.state;
    step.action = snap.action;
    step.depth = snap.depth;
    if (!keep_depth) step.depth.ranges.clear();
    step.target_visible = snap.target_visible;
    record.steps.push_back(std::move(step));
  };
  record.outcome =
      eval::run_episode(scene, pol, goal, limits, rng, {}, instruction, sink, start);
  if (record.outcome.termination == eval::Termination::kAborted) {
    throw TransportError("policy failed mid-episode; partial trajectory discarded");
  }
  return record;
}

namespace {

constexpr char kBlobMagic[4] = {'N', 'V', 'D', 'B'};
constexpr std::uint16_t kBlobSchema = 1;
constexpr int kIndexSchema = 1;

json state_to_json(const world::UavState& s) {
  return json{{"pos", {s.position.x(), s.position.y(), s.position.z()}},
              {"yaw", s.yaw},
              {"clock", s.clock_s}};
}

world::UavState state_from_json(const json& j) {
  world::UavState s;
  const auto& p = j.at("pos");
  s.position = world::Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  s.yaw = j.at("yaw").get<double>();
  s.clock_s = j.at("clock").get<double>();
  return s;
}

}  // namespace

json outcome_to_json(const eval::EpisodeOutcome& o) {
  return json{{"final_distance_m", o.final_distance_m},
              {"alignment_rad", o.alignment_rad},
              {"min_obstacle_clearance_m", o.min_obstacle_clearance_m},
              {"path_length_m", o.path_length_m},
              {"optimal_length_m", o.optimal_length_m},
              {"steps", o.steps},
              {"termination", eval::to_string(o.termination)},
              {"scene_seen", o.scene_seen},
              {"target_seen", o.target_seen}};
}

eval::EpisodeOutcome outcome_from_json(const json& j) {
  eval::EpisodeOutcome o;
  o.final_distance_m = j.at("final_distance_m").get<double>();
  o.alignment_rad = j.at("alignment_rad").get<double>();
  o.min_obstacle_clearance_m = j.at("min_obstacle_clearance_m").get<double>();
  o.path_length_m = j.at("path_length_m").get<double>();
  o.optimal_length_m = j.at("optimal_length_m").get<double>();
  o.steps = j.at("steps").get<int>();
  o.termination = eval::termination_from_string(j.at("termination").get<std::string>());
  o.scene_seen = j.at("scene_seen").get<bool>();
  o.target_seen = j.at("target_seen").get<bool>();
  return o;
}

DatasetWriter::DatasetWriter(const std::string& dir, json meta) : dir_(dir), meta_(std::move(meta)) {
  fs::create_directories(dir_);
  index_.open(dir_ + "/index.jsonl", std::ios::binary | std::ios::trunc);
  blob_.open(dir_ + "/depth.bin", std::ios::binary | std::ios::trunc);
  if (!index_ || !blob_) throw IoError("cannot open dataset files in " + dir_);
  blob_.write(kBlobMagic, 4);
  const unsigned char schema[2] = {kBlobSchema & 0xFF, kBlobSchema >> 8};
  blob_.write(reinterpret_cast<const char*>(schema), 2);
  blob_offset_ = 6;
}

DatasetWriter::~DatasetWriter() {
  try {
    if (!finalized_) finalize();
  } catch (...) {
    // destructor must not throw; an incomplete dataset is detectable by meta.json's absence
  }
}

void DatasetWriter::append(const TrajectoryRecord& record) {
  if (finalized_) throw IoError("dataset writer already finalized");
  json steps = json::array();
  std::uint32_t crc = 0;
  for (const auto& step : record.steps) {
    json sj{{"t", step.t},
            {"state", state_to_json(step.state)},
            {"action",
             {static_cast<double>(step.action.forward_mps),
              static_cast<double>(step.action.yaw_rate_radps),
              static_cast<double>(step.action.vertical_mps)}},
            {"target_visible", step.target_visible}};
    const auto& depth = step.depth;
    const std::size_t n = depth.ranges.size();
    sj["depth"] = {{"off", blob_offset_},
                   {"w", depth.width},
                   {"h", depth.height},
                   {"n", n},
                   {"hfov_deg", depth.hfov_deg},
                   {"max_range", depth.max_range}};
    if (n > 0) {
      static_assert(sizeof(float) == 4);
      blob_.write(reinterpret_cast<const char*>(depth.ranges.data()),
                  static_cast<std::streamsize>(n * 4));
      crc = crc32(depth.ranges.data(), n * 4, crc);
      blob_offset_ += n * 4;
    }
    steps.push_back(std::move(sj));
  }
  json line{{"id", record.id},
            {"scene_id", record.scene_id},
            {"instruction", record.instruction},
            {"goal_target_id", record.goal_target_id},
            {"source", to_string(record.source)},
            {"outcome", outcome_to_json(record.outcome)},
            {"depth_crc", crc},
            {"steps", std::move(steps)}};
  index_ << line.dump() << "\n";
  if (!index_ || !blob_) throw IoError("dataset write failed in " + dir_);
  ++count_;
}

void DatasetWriter::finalize() {
  if (finalized_) return;
  finalized_ = true;
  index_.close();
  blob_.close();
  json meta{{"schema", kIndexSchema}, {"count", count_}};
  if (!meta_.is_null() && !meta_.empty()) meta["extra"] = meta_;
  std::ofstream out(dir_ + "/meta.json", std::ios::binary | std::ios::trunc);
  out << meta.dump(2) << "\n";
  if (!out) throw IoError("cannot write meta.json in " + dir_);
}

void write_dataset(const std::vector<TrajectoryRecord>& records, const std::string& dir,
                   json meta) {
  DatasetWriter writer(dir, std::move(meta));
  for (const auto& r : records) writer.append(r);
  writer.finalize();
}

std::vector<TrajectoryRecord> read_dataset(const std::string& dir, bool load_depth) {
  std::ifstream meta_in(dir + "/meta.json", std::ios::binary);
  if (!meta_in) throw IoError("missing meta.json in " + dir);
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed meta.json: ") + e.what());
  }
  if (!meta.contains("schema") || meta["schema"].get<int>() != kIndexSchema) {
    throw VersionError("unsupported dataset schema");
  }

  std::string blob;
  {
    std::ifstream in(dir + "/depth.bin", std::ios::binary);
    if (!in) throw IoError("missing depth.bin in " + dir);
    blob.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  if (blob.size() < 6) throw TruncationError("depth.bin shorter than its header");
  if (std::memcmp(blob.data(), kBlobMagic, 4) != 0) throw IoError("bad depth.bin magic");
  const std::uint16_t schema = static_cast<std::uint8_t>(blob[4]) |
                               (static_cast<std::uint8_t>(blob[5]) << 8);
  if (schema != kBlobSchema) throw VersionError("unsupported depth.bin schema");

  std::vector<TrajectoryRecord> records;
  std::ifstream index(dir + "/index.jsonl", std::ios::binary);
  if (!index) throw IoError("missing index.jsonl in " + dir);
  std::string line;
  int line_no = 0;
  while (std::getline(index, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("malformed index line " + std::to_string(line_no) + ": " + e.what());
    }
    TrajectoryRecord record;
    record.id = j.at("id").get<std::uint64_t>();
    record.scene_id = j.at("scene_id").get<std::uint64_t>();
    record.instruction = j.at("instruction").get<std::string>();
    record.goal_target_id = j.at("goal_target_id").get<int>();
    record.source = source_from_string(j.at("source").get<std::string>());
    record.outcome = outcome_from_json(j.at("outcome"));
    std::uint32_t crc = 0;
    for (const auto& sj : j.at("steps")) {
      StepRecord step;
      step.t = sj.at("t").get<int>();
      step.state = state_from_json(sj.at("state"));
      const auto& a = sj.at("action");
      step.action.forward_mps = static_cast<float>(a[0].get<double>());
      step.action.yaw_rate_radps = static_cast<float>(a[1].get<double>());
      step.action.vertical_mps = static_cast<float>(a[2].get<double>());
      step.target_visible = sj.at("target_visible").get<bool>();
      const auto& dj = sj.at("depth");
      step.depth.width = dj.at("w").get<int>();
      step.depth.height = dj.at("h").get<int>();
      step.depth.hfov_deg = dj.at("hfov_deg").get<double>();
      step.depth.max_range = dj.at("max_range").get<double>();
      const std::uint64_t off = dj.at("off").get<std::uint64_t>();
      const std::size_t n = dj.at("n").get<std::size_t>();
      if (n > 0) {
        if (off + n * 4 > blob.size()) {
          throw TruncationError("depth.bin truncated: trajectory " + std::to_string(record.id));
        }
        crc = crc32(blob.data() + off, n * 4, crc);
        if (load_depth) {
          step.depth.ranges.resize(n);
          std::memcpy(step.depth.ranges.data(), blob.data() + off, n * 4);
        }
      }
      record.steps.push_back(std::move(step));
    }
    if (crc != j.at("depth_crc").get<std::uint32_t>()) {
      throw ChecksumError("depth checksum mismatch for trajectory " + std::to_string(record.id));
    }
    records.push_back(std::move(record));
  }
  if (static_cast<int>(records.size()) != meta["count"].get<int>()) {
    throw TruncationError("index.jsonl holds " + std::to_string(records.size()) +
                          " records, meta.json declares " + meta["count"].dump());
  }
  return records;
}

DatasetStats dataset_stats(const std::vector<TrajectoryRecord>& records) {
  DatasetStats stats;
  stats.trajectories = static_cast<int>(records.size());
  double path_sum = 0.0;
  long word_sum = 0;
  for (const auto& r : records) {
    stats.steps += static_cast<long>(r.steps.size());
    path_sum += r.outcome.path_length_m;
    word_sum += word_count(r.instruction);
    bool seeking = false;
    for (const auto& step : r.steps) {
      if (step.target_visible) seeking = true;  // first detection is sticky
      if (seeking) {
        ++stats.seeking_steps;
      } else {
        ++stats.avoidance_steps;
      }
    }
    switch (r.outcome.termination) {
      case eval::Termination::kSuccess: ++stats.successes; break;
      case eval::Termination::kCollision: ++stats.collisions; break;
      default: ++stats.timeouts; break;
    }
  }
  if (stats.trajectories > 0) {
    stats.mean_path_length_m = path_sum / stats.trajectories;
    stats.mean_instruction_words = static_cast<double>(word_sum) / stats.trajectories;
  }
  return stats;
}

json to_json(const DatasetStats& stats) {
  const long phase_total = stats.avoidance_steps + stats.seeking_steps;
  return json{{"trajectories", stats.trajectories},
              {"steps", stats.steps},
              {"mean_path_length_m", stats.mean_path_length_m},
              {"mean_instruction_words", stats.mean_instruction_words},
              {"avoidance_steps", stats.avoidance_steps},
              {"seeking_steps", stats.seeking_steps},
              {"avoidance_fraction",
               phase_total > 0 ? static_cast<double>(stats.avoidance_steps) / phase_total : 0.0},
              {"seeking_fraction",
               phase_total > 0 ? static_cast<double>(stats.seeking_steps) / phase_total : 0.0},
              {"successes", stats.successes},
              {"collisions", stats.collisions},
              {"timeouts", stats.timeouts}};
}

}  // namespace navfly::data
