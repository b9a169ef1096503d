#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "navfly/episode.hpp"
#include "navfly/mlp.hpp"
#include "navfly/policy.hpp"
#include "navfly/sensor.hpp"

namespace navfly::sac {

/// tanh-Gaussian policy head: the net emits [mean; rho] per action dim,
/// rho is squashed smoothly into the [-5, 2] log-std band, and emitted
/// actions are limits * tanh(mean + std * eps). Log-probs carry the tanh
/// and limit change-of-variable corrections.
struct GaussianActor {
  Mlp net;
  int act_dim = 3;
  VectorXd limits;

  static constexpr double kLogStdLo = -5.0;
  static constexpr double kLogStdHi = 2.0;

  static GaussianActor make(int obs_dim, int act_dim, const std::vector<int>& hidden,
                            const VectorXd& limits, Rng& rng);

  VectorXd mean_action(const VectorXd& obs) const;
};

/// Everything produced by one reparameterized sampling pass; kept so the
/// actor backward can chain through it.
struct ActorSample {
  MatrixXd mean, rho, log_std, std_dev;
  MatrixXd u, tanh_u, actions;
  VectorXd log_prob;
  MatrixXd eps;
  MlpCache cache;
};

ActorSample sample_actions(const GaussianActor& actor, const MatrixXd& obs, const MatrixXd& eps);

MatrixXd standard_normal(int rows, int cols, Rng& rng);

struct Transition {
  VectorXd s;
  VectorXd a;
  double r = 0.0;
  VectorXd s_next;
  double d = 0.0;  // 1 on environment-terminal transitions (success/collision)
};

struct Batch {
  MatrixXd s, a, s_next;
  VectorXd r, d;
  int size() const { return static_cast<int>(r.size()); }
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {}
  void push(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Uniform sample with replacement. Throws TrainingError("insufficient
  /// data") when fewer than `batch_size` transitions are stored.
  Batch sample(int batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> storage_;
};

struct SacConfig {
  double gamma = 0.99;
  double polyak = 0.995;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  double lr_alpha = 3e-4;
  int batch_size = 128;
  double target_entropy = -3.0;  // -dim(A)
  double initial_alpha = 0.2;
  std::vector<int> hidden = {64, 64};
  std::size_t replay_capacity = 100000;
  int warmup_steps = 1500;   // uniform-random action steps at the start
  int train_after = 1000;    // no gradient steps before this many env steps
  int train_every = 1;
};

struct SacAgent {
  SacConfig config;
  int obs_dim = 0;
  int act_dim = 0;
  GaussianActor actor;
  Mlp q1, q2, q1_target, q2_target;
  double log_alpha = 0.0;
  Adam actor_opt, q1_opt, q2_opt;
  ScalarAdam alpha_opt;
  Rng rng{0};

  static SacAgent make(int obs_dim, int act_dim, const SacConfig& config, std::uint64_t seed,
                       const VectorXd& limits);
  double alpha() const { return std::exp(log_alpha); }
};

/// y_j = r_j + gamma (1 - d_j)(min_i Q'_i(s'_j, a'_j) - alpha log pi(a'_j|s'_j)),
/// with a' freshly sampled. d = 1 short-circuits to exactly r (bit-equal).
VectorXd target_value(const Batch& batch, const Mlp& q1_target, const Mlp& q2_target,
                      const GaussianActor& actor, double alpha, double gamma, Rng& rng);

struct CriticLossResult {
  double loss = 0.0;
  MlpGrads grads_q1, grads_q2;
  double mean_q = 0.0;
};

/// Mean over the batch and both critics of 0.5 (Q_i(s,a) - y)^2, with
/// analytic gradients for both critics. y is a constant.
CriticLossResult critic_loss(const Batch& batch, const Mlp& q1, const Mlp& q2, const VectorXd& y);

struct ActorLossResult {
  double loss = 0.0;
  MlpGrads grads;
  VectorXd log_pi;
};

/// Mean of alpha log pi(a~|s) - min_i Q_i(s, a~) with a~ reparameterized
/// through `eps`; gradients flow through the sampled action into the
/// critics' inputs but never into critic parameters.
ActorLossResult actor_loss(const Batch& batch, const Mlp& q1, const Mlp& q2,
                           const GaussianActor& actor, double alpha, const MatrixXd& eps);

struct AlphaLossResult {
  double loss = 0.0;
  double grad_log_alpha = 0.0;
};

/// -mean(alpha (log pi + H_target)); the gradient is taken on log alpha.
AlphaLossResult alpha_loss(const VectorXd& log_pi, double alpha, double target_entropy);

/// target_new = polyak * target_old + (1 - polyak) * online, elementwise.
void polyak_update(Mlp& target, const Mlp& online, double polyak);

struct StepDiagnostics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double mean_q = 0.0;
};

/// One gradient step on critics, actor and alpha, then the polyak update.
StepDiagnostics train_step(SacAgent& agent, const ReplayBuffer& buffer);

// ---------------------------------------------------------------------------
// Navigation observation encoding and episode collection.

inline constexpr int kPoolW = 8;
inline constexpr int kPoolH = 6;
inline constexpr int kFeatureDim = kPoolW * kPoolH + 3;

/// Mean-pooled depth (normalized by max range) + sin/cos of the goal
/// bearing relative to yaw + normalized altitude.
VectorXd build_features(const world::DepthImage& depth, const world::UavState& state,
                        double goal_bearing_world);

VectorXd navigation_action_limits();

struct RewardConfig {
  double progress_gain = 2.0;
  double step_penalty = 0.01;
  double collision_penalty = 5.0;
  double success_bonus = 10.0;
};

enum class ActionMode { kStochastic, kMean, kUniform };

struct CollectResult {
  std::vector<Transition> transitions;
  eval::EpisodeOutcome outcome;
};

/// Rolls one training episode with the stochastic policy (dt = 0.2 s, max
/// 300 steps by default); rewards follow `reward`. Termination on success,
/// collision, or timeout; only the first two store d = 1.
CollectResult collect_training_episode(const world::Scene& scene, SacAgent& agent,
                                       const RewardConfig& reward,
                                       const eval::EpisodeLimits& limits, Rng& rng,
                                       ActionMode mode = ActionMode::kStochastic,
                                       const world::UavState* start = nullptr,
                                       bool compute_optimal = false);

/// policy::Policy adapter around the actor. Goal-aware when constructed
/// with the goal position (bearing recomputed each step, the paper's
/// point-to-point collection agents); otherwise falls back to the static
/// goal hint.
class SacPolicy final : public policy::Policy {
 public:
  SacPolicy(GaussianActor actor, std::optional<world::Vec3> goal_position, bool deterministic,
            std::uint64_t seed);
  policy::PolicyOutput act(const policy::PolicyInput& input) override;

 private:
  GaussianActor actor_;
  std::optional<world::Vec3> goal_position_;
  bool deterministic_;
  Rng rng_;
};

struct TrainConfig {
  SacConfig sac;
  RewardConfig reward;
  eval::EpisodeLimits limits;
  eval::MetricsThresholds thresholds;
  int max_env_steps = 200000;
  int eval_interval = 5000;
  int eval_episodes = 20;
  double stop_success_rate = 0.95;
  int jobs = 0;
};

struct TrainDiagnosticsRow {
  int env_steps = 0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double mean_q = 0.0;
  double recent_return = 0.0;
  double eval_success = -1.0;  // -1 when no eval ran at this row
};

struct TrainResult {
  SacAgent agent;
  std::vector<TrainDiagnosticsRow> diagnostics;
  int env_steps = 0;
  double final_eval_success = 0.0;
};

/// Mean-action evaluation over `episodes` seeded episodes.
double evaluate_agent(const world::Scene& scene, const SacAgent& agent, int episodes,
                      const eval::EpisodeLimits& limits, const eval::MetricsThresholds& thresholds,
                      std::uint64_t base_seed, int jobs = 0);

TrainResult train_agent(const world::Scene& scene, const TrainConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checkpoints: magic "SACA", u16 schema, layout header, then little-endian
// f64 parameter arrays.

void save_checkpoint(const SacAgent& agent, const std::string& path);
SacAgent load_checkpoint(const std::string& path);

}  // namespace navfly::sac
