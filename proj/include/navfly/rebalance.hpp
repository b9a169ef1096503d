#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "navfly/rng.hpp"
#include "navfly/trajectory.hpp"

namespace navfly::rebalance {

/// K = 2 behavioral phases: obstacle avoidance before the first target
/// detection, target seeking from it onward (first detection is sticky).
enum class PhaseLabel : int { kAvoidance = 1, kSeeking = 2 };
inline constexpr int kNumPhases = 2;

struct PhaseSegment {
  std::size_t begin = 0;  // [begin, end) step range
  std::size_t end = 0;
  PhaseLabel label = PhaseLabel::kAvoidance;
};

/// Partition of [0, T); at most one transition, always 1 -> 2.
struct PhaseSegmentation {
  std::vector<PhaseSegment> segments;
};

PhaseSegmentation segment(const data::TrajectoryRecord& traj);

struct PhaseDistribution {
  Eigen::Vector2d p{0.0, 0.0};  // [avoidance, seeking], sums to 1
  std::array<long, 2> total_steps{0, 0};
};

/// Step-weighted phase fractions: P_0(k) = sum_i |tau_i^(k)| / sum_i T^i.
PhaseDistribution phase_distribution(const std::vector<data::TrajectoryRecord>& dataset);

/// D_KL(p || Uniform(K)) = sum_k p_k log(K p_k), in nats; 0 log 0 = 0.
double kl_from_uniform(const Eigen::VectorXd& p);
double kl_from_uniform(const PhaseDistribution& p);

/// The imbalance figure the source corpus reports for P_0 = (0.73, 0.27);
/// the formula above evaluates to ~0.1099 nats there. Both numbers go in
/// the report (see rebalance_report).
inline constexpr double kReportedCorpusKl = 0.36;

struct TargetDistributionResult {
  Eigen::Vector2d p;
  bool renormalized = false;  // heterogeneous alpha_k can break sum = 1
};

/// P_target(k) = alpha_k P_0(k) + (1 - alpha_k)/K; renormalizes (with a
/// warning flag) if per-phase alphas break the simplex constraint.
TargetDistributionResult target_distribution(const Eigen::Vector2d& p0,
                                             const Eigen::Vector2d& alpha);

/// w_k = P_target(k) / P_0(k); "phase absent" error when a wanted phase
/// has zero mass in the corpus.
Eigen::Vector2d resample_weights(const Eigen::Vector2d& p0, const Eigen::Vector2d& p_target);

/// A phase segment with provenance into its source trajectory.
struct SubTrajectory {
  std::uint64_t trajectory_id = 0;
  std::size_t step_begin = 0;
  std::size_t step_end = 0;
  PhaseLabel label = PhaseLabel::kAvoidance;
  std::size_t length() const { return step_end - step_begin; }
};

struct RebalancePlan {
  Eigen::Vector2d alpha{0.0, 0.0};
  Eigen::Vector2d p0{0.0, 0.0};
  Eigen::Vector2d p_target{0.0, 0.0};
  Eigen::Vector2d weights{0.0, 0.0};
  std::array<std::size_t, 2> pool_sizes{0, 0};  // |D_k| in segments
  std::array<std::size_t, 2> n_k{0, 0};         // round(w_k |D_k|)
  bool renormalized = false;
};

RebalancePlan make_plan(const std::vector<data::TrajectoryRecord>& dataset, double alpha);
RebalancePlan make_plan(const std::vector<data::TrajectoryRecord>& dataset,
                        const Eigen::Vector2d& alpha);

/// Groups segments into per-phase pools D_k.
std::array<std::vector<SubTrajectory>, 2> phase_pools(
    const std::vector<data::TrajectoryRecord>& dataset);

struct RebalancedDataset {
  std::vector<SubTrajectory> samples;  // exactly n_1 + n_2 entries
  RebalancePlan plan;
};

/// Samples n_k segments from D_k: with replacement when w_k > 1, without
/// when w_k <= 1. Output sizes are exact.
RebalancedDataset stratified_resample(const std::vector<data::TrajectoryRecord>& dataset,
                                      const RebalancePlan& plan, Rng& rng);

/// Step-weighted phase fractions of a resampled segment set.
PhaseDistribution resampled_distribution(const RebalancedDataset& rebalanced);

using SegmentStatistic =
    std::function<double(const SubTrajectory&, const data::TrajectoryRecord&)>;

double segment_length_statistic(const SubTrajectory& seg, const data::TrajectoryRecord&);
double mean_forward_speed_statistic(const SubTrajectory& seg, const data::TrajectoryRecord& traj);

struct ImportanceCheck {
  double raw_mean = 0.0;         // direct mean over the original segments
  double reweighted_mean = 0.0;  // 1/w_k-weighted mean over the rebalanced set
  double abs_diff = 0.0;
};

/// Numerically checks the importance identity
/// E_{P_0}[f] = E_{P_target}[f P_0/P_target]: the rebalanced set weighted
/// by 1/w_k (self-normalized) must reproduce the raw mean.
ImportanceCheck importance_check(const std::vector<data::TrajectoryRecord>& dataset,
                                 const RebalancedDataset& rebalanced, const SegmentStatistic& f);

nlohmann::json rebalance_report(const std::vector<data::TrajectoryRecord>& dataset,
                                const RebalancedDataset& rebalanced);

}  // namespace navfly::rebalance
