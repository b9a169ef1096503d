#include "navfly/metrics.hpp"

#include <algorithm>

#include "navfly/errors.hpp"

namespace navfly::eval {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kSuccess: return "success";
    case Termination::kCollision: return "collision";
    case Termination::kTimeout: return "timeout";
    case Termination::kAborted: return "aborted";
  }
  return "unknown";
}

Termination termination_from_string(const std::string& s) {
  if (s == "success") return Termination::kSuccess;
  if (s == "collision") return Termination::kCollision;
  if (s == "timeout") return Termination::kTimeout;
  if (s == "aborted") return Termination::kAborted;
  throw DomainError("unknown termination: " + s);
}

bool is_success(const EpisodeOutcome& o, const MetricsThresholds& th) {
  return o.final_distance_m <= th.d_tau_m && o.alignment_rad <= th.theta_tau_rad &&
         o.termination != Termination::kCollision;
}

namespace {

double efficiency_ratio(const EpisodeOutcome& o) {
  const double denom = std::max(o.path_length_m, o.optimal_length_m);
  if (denom <= 0.0) return 1.0;  // zero-length success: trivially optimal
  return o.optimal_length_m / denom;
}

MetricsCell cell_for(const std::vector<const EpisodeOutcome*>& outcomes,
                     const MetricsThresholds& th) {
  MetricsCell cell;
  double per_sum = 0.0;
  for (const auto* o : outcomes) {
    if (o->termination == Termination::kAborted) {
      ++cell.aborted;
      continue;
    }
    if (!th.count_timeouts && o->termination == Termination::kTimeout) continue;
    ++cell.n;
    const bool thresholds_met =
        o->final_distance_m <= th.d_tau_m && o->alignment_rad <= th.theta_tau_rad;
    if (thresholds_met) cell.sr_literal += 1.0;
    if (thresholds_met && o->termination != Termination::kCollision) {
      ++cell.successes;
      per_sum += efficiency_ratio(*o);
    }
    if (o->min_obstacle_clearance_m <= th.d_col_m) ++cell.collisions;
  }
  if (cell.n > 0) {
    cell.sr = static_cast<double>(cell.successes) / cell.n;
    cell.cr = static_cast<double>(cell.collisions) / cell.n;
    cell.sr_literal /= cell.n;
  }
  if (cell.successes > 0) cell.per = per_sum / cell.successes;
  return cell;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<EpisodeOutcome>& outcomes,
                              const MetricsThresholds& th) {
  int usable = 0;
  for (const auto& o : outcomes) {
    if (o.termination != Termination::kAborted) ++usable;
  }
  if (usable == 0) throw DomainError("compute_metrics: no non-aborted outcomes");

  MetricsReport report;
  report.thresholds = th;
  std::vector<const EpisodeOutcome*> all;
  std::map<std::string, std::vector<const EpisodeOutcome*>> split;
  for (const auto& o : outcomes) {
    all.push_back(&o);
    split[o.scene_seen ? "seen_scene" : "unseen_scene"].push_back(&o);
    split[o.target_seen ? "seen_target" : "unseen_target"].push_back(&o);
    const std::string cell = std::string(o.scene_seen ? "seen_scene" : "unseen_scene") + "/" +
                             (o.target_seen ? "seen_target" : "unseen_target");
    split[cell].push_back(&o);
  }
  report.overall = cell_for(all, th);
  for (const auto& [name, members] : split) {
    report.conditions[name] = cell_for(members, th);
  }
  return report;
}

nlohmann::json to_json(const MetricsCell& cell) {
  nlohmann::json j{{"n", cell.n},          {"successes", cell.successes},
                   {"collisions", cell.collisions}, {"sr", cell.sr},
                   {"cr", cell.cr},        {"sr_literal", cell.sr_literal},
                   {"aborted", cell.aborted}};
  if (cell.per) {
    j["per"] = *cell.per;
  } else {
    j["per"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["overall"] = to_json(report.overall);
  nlohmann::json conditions;
  for (const auto& [name, cell] : report.conditions) conditions[name] = to_json(cell);
  j["conditions"] = conditions;
  j["thresholds"] = {{"d_tau_m", report.thresholds.d_tau_m},
                     {"theta_tau_deg", report.thresholds.theta_tau_rad * 180.0 / M_PI},
                     {"d_col_m", report.thresholds.d_col_m},
                     {"count_timeouts", report.thresholds.count_timeouts}};
  return j;
}

}  // namespace navfly::eval
