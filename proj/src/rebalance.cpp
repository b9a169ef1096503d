#include "navfly/rebalance.hpp"

#include <cmath>
#include <unordered_map>

#include "navfly/errors.hpp"
#include "navfly/log.hpp"

namespace navfly::rebalance {

PhaseSegmentation segment(const data::TrajectoryRecord& traj) {
  PhaseSegmentation seg;
  const std::size_t n = traj.steps.size();
  if (n == 0) return seg;
  std::size_t first_detection = n;
  for (std::size_t t = 0; t < n; ++t) {
    if (traj.steps[t].target_visible) {
      first_detection = t;
      break;
    }
  }
  if (first_detection > 0) {
    seg.segments.push_back({0, first_detection, PhaseLabel::kAvoidance});
  }
  if (first_detection < n) {
    seg.segments.push_back({first_detection, n, PhaseLabel::kSeeking});
  }
  return seg;
}

PhaseDistribution phase_distribution(const std::vector<data::TrajectoryRecord>& dataset) {
  if (dataset.empty()) throw DomainError("phase_distribution: empty dataset");
  PhaseDistribution dist;
  for (const auto& traj : dataset) {
    for (const auto& s : segment(traj).segments) {
      dist.total_steps[s.label == PhaseLabel::kAvoidance ? 0 : 1] +=
          static_cast<long>(s.end - s.begin);
    }
  }
  const long total = dist.total_steps[0] + dist.total_steps[1];
  if (total == 0) throw DomainError("phase_distribution: dataset has no steps");
  dist.p[0] = static_cast<double>(dist.total_steps[0]) / total;
  dist.p[1] = static_cast<double>(dist.total_steps[1]) / total;
  return dist;
}

double kl_from_uniform(const Eigen::VectorXd& p) {
  const int k = static_cast<int>(p.size());
  double kl = 0.0;
  for (int i = 0; i < k; ++i) {
    if (p[i] < 0.0) throw DomainError("kl_from_uniform: negative probability");
    if (p[i] > 0.0) kl += p[i] * std::log(k * p[i]);  // 0 log 0 -> 0
  }
  return kl;
}

double kl_from_uniform(const PhaseDistribution& p) { return kl_from_uniform(Eigen::VectorXd(p.p)); }

TargetDistributionResult target_distribution(const Eigen::Vector2d& p0,
                                             const Eigen::Vector2d& alpha) {
  for (int k = 0; k < 2; ++k) {
    if (alpha[k] < 0.0 || alpha[k] > 1.0) {
      throw DomainError("target_distribution: alpha out of [0,1]");
    }
  }
  TargetDistributionResult result;
  for (int k = 0; k < 2; ++k) {
    result.p[k] = alpha[k] * p0[k] + (1.0 - alpha[k]) / kNumPhases;
  }
  const double total = result.p.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    log::warn("target_distribution: heterogeneous alpha broke normalization (sum %.6f), "
              "renormalizing",
              total);
    result.p /= total;
    result.renormalized = true;
  }
  return result;
}

Eigen::Vector2d resample_weights(const Eigen::Vector2d& p0, const Eigen::Vector2d& p_target) {
  Eigen::Vector2d w;
  for (int k = 0; k < 2; ++k) {
    if (p0[k] <= 0.0) {
      if (p_target[k] > 0.0) {
        throw DomainError("resample_weights: phase absent (P_0 = 0 with P_target > 0 for phase " +
                          std::to_string(k + 1) + ")");
      }
      w[k] = 0.0;
    } else {
      w[k] = p_target[k] / p0[k];
    }
  }
  return w;
}

std::array<std::vector<SubTrajectory>, 2> phase_pools(
    const std::vector<data::TrajectoryRecord>& dataset) {
  std::array<std::vector<SubTrajectory>, 2> pools;
  for (const auto& traj : dataset) {
    for (const auto& s : segment(traj).segments) {
      SubTrajectory sub;
      sub.trajectory_id = traj.id;
      sub.step_begin = s.begin;
      sub.step_end = s.end;
      sub.label = s.label;
      pools[s.label == PhaseLabel::kAvoidance ? 0 : 1].push_back(sub);
    }
  }
  return pools;
}

RebalancePlan make_plan(const std::vector<data::TrajectoryRecord>& dataset, double alpha) {
  return make_plan(dataset, Eigen::Vector2d(alpha, alpha));
}

RebalancePlan make_plan(const std::vector<data::TrajectoryRecord>& dataset,
                        const Eigen::Vector2d& alpha) {
  RebalancePlan plan;
  plan.alpha = alpha;
  const PhaseDistribution p0 = phase_distribution(dataset);
  plan.p0 = p0.p;
  const auto target = target_distribution(plan.p0, alpha);
  plan.p_target = target.p;
  plan.renormalized = target.renormalized;
  plan.weights = resample_weights(plan.p0, plan.p_target);
  const auto pools = phase_pools(dataset);
  for (int k = 0; k < 2; ++k) {
    plan.pool_sizes[k] = pools[k].size();
    plan.n_k[k] = static_cast<std::size_t>(
        std::llround(plan.weights[k] * static_cast<double>(pools[k].size())));
  }
  return plan;
}

RebalancedDataset stratified_resample(const std::vector<data::TrajectoryRecord>& dataset,
                                      const RebalancePlan& plan, Rng& rng) {
  RebalancedDataset out;
  out.plan = plan;
  const auto pools = phase_pools(dataset);
  for (int k = 0; k < 2; ++k) {
    const auto& pool = pools[k];
    const std::size_t n = plan.n_k[k];
    if (plan.weights[k] > 1.0) {
      // Upsampling: draw with replacement.
      for (std::size_t i = 0; i < n; ++i) out.samples.push_back(pool[rng.index(pool.size())]);
    } else {
      // Downsampling (or w = 1): draw without replacement.
      if (n > pool.size()) {
        throw DomainError("stratified_resample: n_k exceeds pool without replacement");
      }
      std::vector<std::size_t> idx(pool.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::size_t i = 0; i < n; ++i) {  // partial Fisher-Yates
        const std::size_t j = i + rng.index(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out.samples.push_back(pool[idx[i]]);
      }
    }
  }
  return out;
}

PhaseDistribution resampled_distribution(const RebalancedDataset& rebalanced) {
  PhaseDistribution dist;
  for (const auto& s : rebalanced.samples) {
    dist.total_steps[s.label == PhaseLabel::kAvoidance ? 0 : 1] +=
        static_cast<long>(s.length());
  }
  const long total = dist.total_steps[0] + dist.total_steps[1];
  if (total == 0) throw DomainError("resampled_distribution: empty sample");
  dist.p[0] = static_cast<double>(dist.total_steps[0]) / total;
  dist.p[1] = static_cast<double>(dist.total_steps[1]) / total;
  return dist;
}

double segment_length_statistic(const SubTrajectory& seg, const data::TrajectoryRecord&) {
  return static_cast<double>(seg.length());
}

double mean_forward_speed_statistic(const SubTrajectory& seg,
                                    const data::TrajectoryRecord& traj) {
  double sum = 0.0;
  for (std::size_t t = seg.step_begin; t < seg.step_end && t < traj.steps.size(); ++t) {
    sum += traj.steps[t].action.forward_mps;
  }
  return seg.length() > 0 ? sum / static_cast<double>(seg.length()) : 0.0;
}

ImportanceCheck importance_check(const std::vector<data::TrajectoryRecord>& dataset,
                                 const RebalancedDataset& rebalanced, const SegmentStatistic& f) {
  std::unordered_map<std::uint64_t, const data::TrajectoryRecord*> by_id;
  for (const auto& traj : dataset) by_id[traj.id] = &traj;
  const auto lookup = [&](const SubTrajectory& seg) -> const data::TrajectoryRecord& {
    const auto it = by_id.find(seg.trajectory_id);
    if (it == by_id.end()) {
      throw DomainError("importance_check: unknown trajectory id " +
                        std::to_string(seg.trajectory_id));
    }
    return *it->second;
  };

  ImportanceCheck check;
  const auto pools = phase_pools(dataset);
  double raw_sum = 0.0;
  std::size_t raw_n = 0;
  for (const auto& pool : pools) {
    for (const auto& seg : pool) {
      raw_sum += f(seg, lookup(seg));
      ++raw_n;
    }
  }
  if (raw_n == 0) throw DomainError("importance_check: empty dataset");
  check.raw_mean = raw_sum / static_cast<double>(raw_n);

  // Self-normalized importance estimator: weights 1/w_k undo the
  // resampling; the weight sum estimates the original pool size.
  double weighted_sum = 0.0;
  double weight_total = 0.0;
  for (const auto& seg : rebalanced.samples) {
    const double w = rebalanced.plan.weights[seg.label == PhaseLabel::kAvoidance ? 0 : 1];
    if (w <= 0.0) continue;
    weighted_sum += f(seg, lookup(seg)) / w;
    weight_total += 1.0 / w;
  }
  if (weight_total <= 0.0) throw DomainError("importance_check: empty rebalanced set");
  check.reweighted_mean = weighted_sum / weight_total;
  check.abs_diff = std::abs(check.reweighted_mean - check.raw_mean);
  return check;
}

nlohmann::json rebalance_report(const std::vector<data::TrajectoryRecord>& dataset,
                                const RebalancedDataset& rebalanced) {
  const auto& plan = rebalanced.plan;
  const double kl = kl_from_uniform(Eigen::VectorXd(plan.p0));
  const auto after = resampled_distribution(rebalanced);
  const auto check = importance_check(dataset, rebalanced, segment_length_statistic);
  return nlohmann::json{
      {"p0", {plan.p0[0], plan.p0[1]}},
      {"kl_from_uniform_nats", kl},
      {"kl_reported_by_source_corpus_nats", kReportedCorpusKl},
      {"kl_discrepancy_note",
       "formula value differs from the corpus-reported 0.36 nats; both are surfaced"},
      {"alpha", {plan.alpha[0], plan.alpha[1]}},
      {"p_target", {plan.p_target[0], plan.p_target[1]}},
      {"p_target_renormalized", plan.renormalized},
      {"weights", {plan.weights[0], plan.weights[1]}},
      {"pool_sizes", {plan.pool_sizes[0], plan.pool_sizes[1]}},
      {"n_k", {plan.n_k[0], plan.n_k[1]}},
      {"resampled_p", {after.p[0], after.p[1]}},
      {"importance_check",
       {{"statistic", "segment_length"},
        {"raw_mean", check.raw_mean},
        {"reweighted_mean", check.reweighted_mean},
        {"abs_diff", check.abs_diff}}}};
}

}  // namespace navfly::rebalance
