#include "navfly/sac.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "navfly/errors.hpp"
#include "navfly/log.hpp"
#include "navfly/planner.hpp"

namespace navfly::sac {

using world::UavState;
using world::Vec3;

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

/// log(1 - tanh(u)^2), computed as 2*(log 2 - |u| - log1p(exp(-2|u|))).
inline double log1m_tanh2(double u) {
  const double au = std::abs(u);
  return 2.0 * (M_LN2 - au - std::log1p(std::exp(-2.0 * au)));
}

}  // namespace

GaussianActor GaussianActor::make(int obs_dim, int act_dim, const std::vector<int>& hidden,
                                  const VectorXd& limits, Rng& rng) {
  GaussianActor actor;
  actor.act_dim = act_dim;
  actor.limits = limits;
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(2 * act_dim);
  actor.net = Mlp::make(sizes, rng, 0.01);
  return actor;
}

VectorXd GaussianActor::mean_action(const VectorXd& obs) const {
  const VectorXd out = net.forward(obs);
  VectorXd a(act_dim);
  for (int d = 0; d < act_dim; ++d) a[d] = limits[d] * std::tanh(out[d]);
  return a;
}

MatrixXd standard_normal(int rows, int cols, Rng& rng) {
  MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = rng.normal();
  }
  return m;
}

ActorSample sample_actions(const GaussianActor& actor, const MatrixXd& obs, const MatrixXd& eps) {
  const int a_dim = actor.act_dim;
  ActorSample s;
  s.eps = eps;
  const MatrixXd out = forward(actor.net, obs, s.cache);
  s.mean = out.topRows(a_dim);
  s.rho = out.bottomRows(a_dim);

  const double lo = GaussianActor::kLogStdLo;
  const double hi = GaussianActor::kLogStdHi;
  s.log_std = (0.5 * (hi + lo) + 0.5 * (hi - lo) * s.rho.array().tanh()).matrix();
  s.std_dev = s.log_std.array().exp().matrix();
  s.u = s.mean + s.std_dev.cwiseProduct(eps);
  s.tanh_u = s.u.array().tanh().matrix();
  s.actions = s.tanh_u;
  for (int d = 0; d < a_dim; ++d) s.actions.row(d) *= actor.limits[d];

  const int batch = static_cast<int>(obs.cols());
  s.log_prob = VectorXd::Zero(batch);
  double limit_log_sum = 0.0;
  for (int d = 0; d < a_dim; ++d) limit_log_sum += std::log(actor.limits[d]);
  for (int b = 0; b < batch; ++b) {
    double lp = -a_dim * kHalfLog2Pi - limit_log_sum;
    for (int d = 0; d < a_dim; ++d) {
      lp += -0.5 * eps(d, b) * eps(d, b) - s.log_std(d, b) - log1m_tanh2(s.u(d, b));
    }
    s.log_prob[b] = lp;
  }
  return s;
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

Batch ReplayBuffer::sample(int batch_size, Rng& rng) const {
  if (static_cast<int>(storage_.size()) < batch_size) {
    throw TrainingError("insufficient data: replay holds " + std::to_string(storage_.size()) +
                        ", batch needs " + std::to_string(batch_size));
  }
  const int obs_dim = static_cast<int>(storage_.front().s.size());
  const int act_dim = static_cast<int>(storage_.front().a.size());
  Batch batch;
  batch.s.resize(obs_dim, batch_size);
  batch.a.resize(act_dim, batch_size);
  batch.s_next.resize(obs_dim, batch_size);
  batch.r.resize(batch_size);
  batch.d.resize(batch_size);
  for (int b = 0; b < batch_size; ++b) {
    const Transition& t = storage_[rng.index(storage_.size())];
    batch.s.col(b) = t.s;
    batch.a.col(b) = t.a;
    batch.s_next.col(b) = t.s_next;
    batch.r[b] = t.r;
    batch.d[b] = t.d;
  }
  return batch;
}

SacAgent SacAgent::make(int obs_dim, int act_dim, const SacConfig& config, std::uint64_t seed,
                        const VectorXd& limits) {
  SacAgent agent;
  agent.config = config;
  agent.obs_dim = obs_dim;
  agent.act_dim = act_dim;
  agent.rng = Rng(Rng::mix(seed, 0x5AC));

  Rng init_rng(Rng::mix(seed, 0x1417));
  agent.actor = GaussianActor::make(obs_dim, act_dim, config.hidden, limits, init_rng);

  std::vector<int> critic_sizes{obs_dim + act_dim};
  critic_sizes.insert(critic_sizes.end(), config.hidden.begin(), config.hidden.end());
  critic_sizes.push_back(1);
  agent.q1 = Mlp::make(critic_sizes, init_rng);
  agent.q2 = Mlp::make(critic_sizes, init_rng);
  agent.q1_target = agent.q1;
  agent.q2_target = agent.q2;

  agent.log_alpha = std::log(config.initial_alpha);
  agent.actor_opt = Adam(agent.actor.net, config.lr_actor);
  agent.q1_opt = Adam(agent.q1, config.lr_critic);
  agent.q2_opt = Adam(agent.q2, config.lr_critic);
  agent.alpha_opt = ScalarAdam(config.lr_alpha);
  return agent;
}

VectorXd target_value(const Batch& batch, const Mlp& q1_target, const Mlp& q2_target,
                      const GaussianActor& actor, double alpha, double gamma, Rng& rng) {
  if (batch.size() == 0) throw TrainingError("target_value: empty batch");
  const MatrixXd eps = standard_normal(actor.act_dim, batch.size(), rng);
  const ActorSample next = sample_actions(actor, batch.s_next, eps);

  MatrixXd x(batch.s_next.rows() + next.actions.rows(), batch.size());
  x << batch.s_next, next.actions;
  const MatrixXd qa = q1_target.forward(x);
  const MatrixXd qb = q2_target.forward(x);

  VectorXd y(batch.size());
  for (int b = 0; b < batch.size(); ++b) {
    if (batch.d[b] != 0.0) {
      // Terminal: the target is exactly the immediate reward.
      y[b] = batch.r[b];
    } else {
      const double qmin = std::min(qa(0, b), qb(0, b));
      y[b] = batch.r[b] + gamma * (qmin - alpha * next.log_prob[b]);
    }
  }
  if (!y.allFinite()) throw TrainingError("target_value: non-finite target");
  return y;
}

CriticLossResult critic_loss(const Batch& batch, const Mlp& q1, const Mlp& q2, const VectorXd& y) {
  const int batch_size = batch.size();
  if (batch_size == 0) throw TrainingError("critic_loss: empty batch");
  MatrixXd x(batch.s.rows() + batch.a.rows(), batch_size);
  x << batch.s, batch.a;

  CriticLossResult result;
  result.grads_q1 = MlpGrads::zeros_like(q1);
  result.grads_q2 = MlpGrads::zeros_like(q2);

  const Mlp* critics[2] = {&q1, &q2};
  MlpGrads* grads[2] = {&result.grads_q1, &result.grads_q2};
  const double scale = 1.0 / (2.0 * batch_size);
  for (int i = 0; i < 2; ++i) {
    MlpCache cache;
    const MatrixXd q = forward(*critics[i], x, cache);
    const MatrixXd err = q - y.transpose();
    result.loss += 0.5 * err.array().square().sum() * scale;
    result.mean_q += q.sum() / (2.0 * batch_size);
    backward(*critics[i], cache, (err * scale).eval(), *grads[i]);
  }
  if (!std::isfinite(result.loss)) throw TrainingError("critic_loss: non-finite loss");
  return result;
}

ActorLossResult actor_loss(const Batch& batch, const Mlp& q1, const Mlp& q2,
                           const GaussianActor& actor, double alpha, const MatrixXd& eps) {
  const int batch_size = batch.size();
  const int a_dim = actor.act_dim;
  if (batch_size == 0) throw TrainingError("actor_loss: empty batch");

  ActorSample s = sample_actions(actor, batch.s, eps);

  MatrixXd x(batch.s.rows() + a_dim, batch_size);
  x << batch.s, s.actions;
  MlpCache cache1, cache2;
  const MatrixXd qa = forward(q1, x, cache1);
  const MatrixXd qb = forward(q2, x, cache2);

  ActorLossResult result;
  result.log_pi = s.log_prob;
  double loss = 0.0;
  MatrixXd dq1 = MatrixXd::Zero(1, batch_size);
  MatrixXd dq2 = MatrixXd::Zero(1, batch_size);
  const double inv_b = 1.0 / batch_size;
  for (int b = 0; b < batch_size; ++b) {
    const double qmin = std::min(qa(0, b), qb(0, b));
    loss += (alpha * s.log_prob[b] - qmin) * inv_b;
    if (qa(0, b) <= qb(0, b)) {
      dq1(0, b) = -inv_b;
    } else {
      dq2(0, b) = -inv_b;
    }
  }
  result.loss = loss;
  if (!std::isfinite(loss)) throw TrainingError("actor_loss: non-finite loss");

  // Gradient w.r.t. the sampled action through the chosen critic's input;
  // critic parameters stay frozen.
  const MatrixXd dx1 = backward_input(q1, cache1, dq1);
  const MatrixXd dx2 = backward_input(q2, cache2, dq2);
  const MatrixXd d_action = dx1.bottomRows(a_dim) + dx2.bottomRows(a_dim);

  // Chain through a = limits*tanh(u), u = mean + std*eps, and the log-prob
  // terms evaluated at (u, mean, log_std).
  MatrixXd du(a_dim, batch_size), dmean(a_dim, batch_size), dlog_std(a_dim, batch_size);
  for (int b = 0; b < batch_size; ++b) {
    const double dlp = alpha * inv_b;
    for (int d = 0; d < a_dim; ++d) {
      const double tu = s.tanh_u(d, b);
      const double sd = s.std_dev(d, b);
      const double e = s.eps(d, b);
      double du_db = d_action(d, b) * actor.limits[d] * (1.0 - tu * tu);
      du_db += dlp * (-e / sd + 2.0 * tu);
      du(d, b) = du_db;
      dmean(d, b) = du_db + dlp * (e / sd);
      dlog_std(d, b) = du_db * sd * e + dlp * (e * e - 1.0);
    }
  }
  const double half_span = 0.5 * (GaussianActor::kLogStdHi - GaussianActor::kLogStdLo);
  const MatrixXd t_rho = s.rho.array().tanh().matrix();
  const MatrixXd drho =
      dlog_std.cwiseProduct((half_span * (1.0 - t_rho.array().square())).matrix());

  MatrixXd dout(2 * a_dim, batch_size);
  dout << dmean, drho;
  result.grads = MlpGrads::zeros_like(actor.net);
  backward(actor.net, s.cache, dout, result.grads);
  return result;
}

AlphaLossResult alpha_loss(const VectorXd& log_pi, double alpha, double target_entropy) {
  AlphaLossResult result;
  const double mean_term = (log_pi.array() + target_entropy).mean();
  result.loss = -alpha * mean_term;
  result.grad_log_alpha = -alpha * mean_term;  // d/dlog_alpha of -e^{log_alpha} * mean_term
  return result;
}

void polyak_update(Mlp& target, const Mlp& online, double polyak) {
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] = polyak * target.weights[l] + (1.0 - polyak) * online.weights[l];
    target.biases[l] = polyak * target.biases[l] + (1.0 - polyak) * online.biases[l];
  }
}

StepDiagnostics train_step(SacAgent& agent, const ReplayBuffer& buffer) {
  const auto& cfg = agent.config;
  Batch batch = buffer.sample(cfg.batch_size, agent.rng);

  const VectorXd y = target_value(batch, agent.q1_target, agent.q2_target, agent.actor,
                                  agent.alpha(), cfg.gamma, agent.rng);
  CriticLossResult cl = critic_loss(batch, agent.q1, agent.q2, y);
  agent.q1_opt.step(agent.q1, cl.grads_q1);
  agent.q2_opt.step(agent.q2, cl.grads_q2);

  const MatrixXd eps = standard_normal(agent.act_dim, batch.size(), agent.rng);
  ActorLossResult al = actor_loss(batch, agent.q1, agent.q2, agent.actor, agent.alpha(), eps);
  agent.actor_opt.step(agent.actor.net, al.grads);

  AlphaLossResult aL = alpha_loss(al.log_pi, agent.alpha(), cfg.target_entropy);
  agent.alpha_opt.step(agent.log_alpha, aL.grad_log_alpha);

  polyak_update(agent.q1_target, agent.q1, cfg.polyak);
  polyak_update(agent.q2_target, agent.q2, cfg.polyak);

  if (!agent.q1.all_finite() || !agent.q2.all_finite() || !agent.actor.net.all_finite() ||
      !std::isfinite(agent.log_alpha)) {
    throw TrainingError("train_step: parameters became non-finite");
  }
  StepDiagnostics diag;
  diag.critic_loss = cl.loss;
  diag.actor_loss = al.loss;
  diag.alpha_loss = aL.loss;
  diag.alpha = agent.alpha();
  diag.mean_q = cl.mean_q;
  return diag;
}

// ---------------------------------------------------------------------------

VectorXd build_features(const world::DepthImage& depth, const UavState& state,
                        double goal_bearing_world) {
  VectorXd f(kFeatureDim);
  int idx = 0;
  for (int pj = 0; pj < kPoolH; ++pj) {
    const int r0 = pj * depth.height / kPoolH;
    const int r1 = (pj + 1) * depth.height / kPoolH;
    for (int pi = 0; pi < kPoolW; ++pi) {
      const int c0 = pi * depth.width / kPoolW;
      const int c1 = (pi + 1) * depth.width / kPoolW;
      double sum = 0.0;
      int n = 0;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          sum += depth.at(r, c);
          ++n;
        }
      }
      f[idx++] = n > 0 ? sum / (n * depth.max_range) : 1.0;
    }
  }
  const double rel = world::normalize_angle(goal_bearing_world - state.yaw);
  f[idx++] = std::sin(rel);
  f[idx++] = std::cos(rel);
  f[idx++] = state.position.z() / world::kAltitudeMax;
  return f;
}

VectorXd navigation_action_limits() {
  VectorXd limits(3);
  const world::ActionLimits lim;
  limits << lim.forward_max, lim.yaw_rate_max, lim.vertical_max;
  return limits;
}

namespace {

double bearing_to(const UavState& state, const Vec3& target) {
  return std::atan2(target.y() - state.position.y(), target.x() - state.position.x());
}

double horizontal_distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x() - b.x(), a.y() - b.y());
}

world::VelocityAction to_velocity_action(const VectorXd& a) {
  return world::VelocityAction{static_cast<float>(a[0]), static_cast<float>(a[1]),
                               static_cast<float>(a[2])};
}

}  // namespace

CollectResult collect_training_episode(const world::Scene& scene, SacAgent& agent,
                                       const RewardConfig& reward,
                                       const eval::EpisodeLimits& limits, Rng& rng,
                                       ActionMode mode, const world::UavState* start,
                                       bool compute_optimal) {
  if (agent.act_dim != 3) throw TrainingError("collect_training_episode needs a 3-DoF agent");
  const auto& goal = scene.goal();
  const eval::MetricsThresholds th;

  CollectResult result;
  auto& outcome = result.outcome;
  outcome.target_seen = goal.seen_flag;
  outcome.termination = eval::Termination::kTimeout;
  outcome.min_obstacle_clearance_m = world::kMaxRange;
  outcome.alignment_rad = M_PI;

  UavState state = start != nullptr ? *start : eval::spawn_state(scene, rng);
  if (compute_optimal) {
    outcome.optimal_length_m = eval::optimal_path_length(
        scene, {state.position.x(), state.position.y()}, {goal.position.x(), goal.position.y()});
  }

  world::DepthImage depth = world::render_depth(scene, state);
  VectorXd obs = build_features(depth, state, bearing_to(state, goal.position));
  double dist = horizontal_distance(state.position, goal.position);
  outcome.final_distance_m = dist;

  for (int t = 0; t < limits.max_steps; ++t) {
    VectorXd a(3);
    switch (mode) {
      case ActionMode::kUniform:
        for (int d = 0; d < 3; ++d) {
          a[d] = rng.uniform(-agent.actor.limits[d], agent.actor.limits[d]);
        }
        break;
      case ActionMode::kMean:
        a = agent.actor.mean_action(obs);
        break;
      case ActionMode::kStochastic: {
        const MatrixXd eps = standard_normal(3, 1, rng);
        a = sample_actions(agent.actor, obs, eps).actions.col(0);
        break;
      }
    }
    const world::VelocityAction action = to_velocity_action(a);

    const UavState next = world::step(state, action, limits.dt);
    outcome.path_length_m += (next.position - state.position).norm();
    outcome.steps = t + 1;

    const auto collision = world::check_collision(scene, next);
    outcome.min_obstacle_clearance_m =
        std::min(outcome.min_obstacle_clearance_m, collision.min_obstacle_distance);
    const double new_dist = horizontal_distance(next.position, goal.position);

    // Alignment of the commanded horizontal velocity with the goal bearing.
    double align = M_PI;
    if (std::abs(action.forward_mps) > 1e-9 && new_dist > 1e-9) {
      const double vx = action.forward_mps * std::cos(state.yaw);
      const double vy = action.forward_mps * std::sin(state.yaw);
      const double tx = goal.position.x() - next.position.x();
      const double ty = goal.position.y() - next.position.y();
      const double c = std::clamp(
          (vx * tx + vy * ty) / (std::hypot(vx, vy) * std::hypot(tx, ty)), -1.0, 1.0);
      align = std::acos(c);
    }
    const bool success = new_dist <= th.d_tau_m && align <= th.theta_tau_rad;
    const bool terminal = collision.collided || success;

    double r = reward.progress_gain * (dist - new_dist) - reward.step_penalty;
    if (collision.collided) r -= reward.collision_penalty;
    if (success) r += reward.success_bonus;

    const world::DepthImage depth_next = world::render_depth(scene, next);
    const VectorXd obs_next = build_features(depth_next, next, bearing_to(next, goal.position));

    Transition tr;
    tr.s = obs;
    tr.a = VectorXd(3);
    tr.a << action.forward_mps, action.yaw_rate_radps, action.vertical_mps;
    tr.r = r;
    tr.s_next = obs_next;
    tr.d = terminal ? 1.0 : 0.0;
    result.transitions.push_back(std::move(tr));

    state = next;
    obs = obs_next;
    dist = new_dist;
    outcome.final_distance_m = new_dist;
    outcome.alignment_rad = align;

    if (collision.collided) {
      outcome.termination = eval::Termination::kCollision;
      break;
    }
    if (success) {
      outcome.termination = eval::Termination::kSuccess;
      break;
    }
  }
  return result;
}

SacPolicy::SacPolicy(GaussianActor actor, std::optional<Vec3> goal_position, bool deterministic,
                     std::uint64_t seed)
    : actor_(std::move(actor)),
      goal_position_(goal_position),
      deterministic_(deterministic),
      rng_(Rng::mix(seed, 0x901)) {}

policy::PolicyOutput SacPolicy::act(const policy::PolicyInput& input) {
  double bearing;
  if (goal_position_) {
    bearing = bearing_to(input.state, *goal_position_);
  } else if (input.goal_hint) {
    bearing = *input.goal_hint;
  } else {
    bearing = input.state.yaw;
  }
  const VectorXd obs = build_features(input.depth, input.state, bearing);
  VectorXd a;
  if (deterministic_) {
    a = actor_.mean_action(obs);
  } else {
    const MatrixXd eps = standard_normal(actor_.act_dim, 1, rng_);
    a = sample_actions(actor_, obs, eps).actions.col(0);
  }
  policy::PolicyOutput out;
  out.action = to_velocity_action(a);
  return out;
}

double evaluate_agent(const world::Scene& scene, const SacAgent& agent, int episodes,
                      const eval::EpisodeLimits& limits, const eval::MetricsThresholds& thresholds,
                      std::uint64_t base_seed, int jobs) {
  std::vector<int> success(episodes, 0);
  eval::parallel_for(episodes, jobs, [&](std::size_t i) {
    SacPolicy pol(agent.actor, scene.goal().position, /*deterministic=*/true,
                  Rng::mix(base_seed, i));
    Rng rng(Rng::mix(base_seed, 1000 + i));
    const auto outcome =
        eval::run_episode(scene, pol, scene.goal(), limits, rng, thresholds);
    success[i] = eval::is_success(outcome, thresholds) ? 1 : 0;
  });
  double total = 0.0;
  for (const int s : success) total += s;
  return episodes > 0 ? total / episodes : 0.0;
}

TrainResult train_agent(const world::Scene& scene, const TrainConfig& config, std::uint64_t seed) {
  TrainResult result{
      SacAgent::make(kFeatureDim, 3, config.sac, seed, navigation_action_limits()), {}, 0, 0.0};
  SacAgent& agent = result.agent;
  ReplayBuffer buffer(config.sac.replay_capacity);
  Rng env_rng(Rng::mix(seed, 0xE0));

  int env_steps = 0;
  int next_eval = config.eval_interval;
  int next_log = 1000;
  int update_debt = 0;
  double recent_return = 0.0;
  StepDiagnostics last_diag;
  bool stop = false;
  bool eval_ran = false;

  while (env_steps < config.max_env_steps && !stop) {
    const ActionMode mode =
        env_steps < config.sac.warmup_steps ? ActionMode::kUniform : ActionMode::kStochastic;
    CollectResult ep = collect_training_episode(scene, agent, config.reward, config.limits,
                                                env_rng, mode);
    double ep_return = 0.0;
    for (auto& tr : ep.transitions) {
      ep_return += tr.r;
      buffer.push(std::move(tr));
    }
    recent_return = 0.9 * recent_return + 0.1 * ep_return;
    env_steps += ep.outcome.steps;
    result.env_steps = env_steps;

    if (env_steps >= config.sac.train_after &&
        buffer.size() >= static_cast<std::size_t>(config.sac.batch_size)) {
      update_debt += ep.outcome.steps;
      while (update_debt >= config.sac.train_every) {
        last_diag = train_step(agent, buffer);
        update_debt -= config.sac.train_every;
      }
    }

    if (env_steps >= next_log) {
      TrainDiagnosticsRow row;
      row.env_steps = env_steps;
      row.critic_loss = last_diag.critic_loss;
      row.actor_loss = last_diag.actor_loss;
      row.alpha = last_diag.alpha;
      row.mean_q = last_diag.mean_q;
      row.recent_return = recent_return;
      result.diagnostics.push_back(row);
      while (next_log <= env_steps) next_log += 1000;
    }

    if (env_steps >= next_eval) {
      const double sr = evaluate_agent(scene, agent, config.eval_episodes, config.limits,
                                       config.thresholds, Rng::mix(seed, 0xE7A1), config.jobs);
      eval_ran = true;
      result.final_eval_success = sr;
      TrainDiagnosticsRow row;
      row.env_steps = env_steps;
      row.critic_loss = last_diag.critic_loss;
      row.actor_loss = last_diag.actor_loss;
      row.alpha = last_diag.alpha;
      row.mean_q = last_diag.mean_q;
      row.recent_return = recent_return;
      row.eval_success = sr;
      result.diagnostics.push_back(row);
      log::info("train: %d env steps, eval success %.2f, alpha %.3f", env_steps, sr,
                last_diag.alpha);
      while (next_eval <= env_steps) next_eval += config.eval_interval;
      if (sr >= config.stop_success_rate) stop = true;
    }
  }
  if (!eval_ran) {
    result.final_eval_success = evaluate_agent(scene, agent, config.eval_episodes, config.limits,
                                               config.thresholds, Rng::mix(seed, 0xE7A1),
                                               config.jobs);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O.

namespace {

void put_bytes(std::string& out, const void* data, std::size_t n) {
  out.append(static_cast<const char*>(data), n);
}

void put_u16(std::string& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>(v >> 8)};
  put_bytes(out, b, 2);
}

void put_u32(std::string& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  put_bytes(out, b, 4);
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  put_bytes(out, b, 8);
}

class ByteReader {
 public:
  ByteReader(const std::string& data) : data_(data) {}
  void read(void* out, std::size_t n) {
    if (pos_ + n > data_.size()) throw IoError("truncated checkpoint");
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint16_t u16() {
    unsigned char b[2];
    read(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  double f64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

void put_array(std::string& out, const std::string& name, const MatrixXd& m) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  put_bytes(out, name.data(), name.size());
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) put_f64(out, m(r, c));
  }
}

void put_mlp(std::string& out, const std::string& prefix, const Mlp& net) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    put_array(out, prefix + ".w" + std::to_string(l), net.weights[l]);
    put_array(out, prefix + ".b" + std::to_string(l), net.biases[l]);
  }
}

MatrixXd read_array(ByteReader& in, std::string& name) {
  const std::uint32_t name_len = in.u32();
  if (name_len > 256) throw IoError("corrupt checkpoint array header");
  name = in.str(name_len);
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  MatrixXd m(rows, cols);
  for (std::uint32_t c = 0; c < cols; ++c) {
    for (std::uint32_t r = 0; r < rows; ++r) m(r, c) = in.f64();
  }
  return m;
}

}  // namespace

void save_checkpoint(const SacAgent& agent, const std::string& path) {
  std::string blob;
  put_bytes(blob, "SACA", 4);
  put_u16(blob, 1);  // schema
  put_u32(blob, static_cast<std::uint32_t>(agent.obs_dim));
  put_u32(blob, static_cast<std::uint32_t>(agent.act_dim));
  put_u32(blob, static_cast<std::uint32_t>(agent.config.hidden.size()));
  for (const int h : agent.config.hidden) put_u32(blob, static_cast<std::uint32_t>(h));
  put_f64(blob, agent.log_alpha);
  for (int d = 0; d < agent.act_dim; ++d) put_f64(blob, agent.actor.limits[d]);

  const std::uint32_t n_arrays = static_cast<std::uint32_t>(
      2 * (agent.actor.net.weights.size() + 4 * agent.q1.weights.size()));
  put_u32(blob, n_arrays);
  put_mlp(blob, "actor", agent.actor.net);
  put_mlp(blob, "q1", agent.q1);
  put_mlp(blob, "q2", agent.q2);
  put_mlp(blob, "q1t", agent.q1_target);
  put_mlp(blob, "q2t", agent.q2_target);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("write failed: " + path);
}

SacAgent load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader reader(blob);

  char magic[4];
  reader.read(magic, 4);
  if (std::memcmp(magic, "SACA", 4) != 0) throw IoError("bad checkpoint magic");
  const std::uint16_t schema = reader.u16();
  if (schema != 1) throw IoError("unsupported checkpoint schema " + std::to_string(schema));

  SacConfig config;
  const int obs_dim = static_cast<int>(reader.u32());
  const int act_dim = static_cast<int>(reader.u32());
  const std::uint32_t n_hidden = reader.u32();
  if (n_hidden > 16) throw IoError("corrupt checkpoint hidden-layer count");
  config.hidden.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i) config.hidden.push_back(static_cast<int>(reader.u32()));
  const double log_alpha = reader.f64();
  VectorXd limits(act_dim);
  for (int d = 0; d < act_dim; ++d) limits[d] = reader.f64();

  SacAgent agent = SacAgent::make(obs_dim, act_dim, config, 0, limits);
  agent.log_alpha = log_alpha;

  const std::uint32_t n_arrays = reader.u32();
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    std::string name;
    const MatrixXd m = read_array(reader, name);
    const auto apply = [&](Mlp& net, const std::string& prefix) {
      for (std::size_t l = 0; l < net.weights.size(); ++l) {
        if (name == prefix + ".w" + std::to_string(l)) {
          if (m.rows() != net.weights[l].rows() || m.cols() != net.weights[l].cols()) {
            throw IoError("checkpoint array shape mismatch for " + name);
          }
          net.weights[l] = m;
          return true;
        }
        if (name == prefix + ".b" + std::to_string(l)) {
          if (m.size() != net.biases[l].size()) {
            throw IoError("checkpoint array shape mismatch for " + name);
          }
          net.biases[l] = m.col(0);
          return true;
        }
      }
      return false;
    };
    if (!apply(agent.actor.net, "actor") && !apply(agent.q1, "q1") && !apply(agent.q2, "q2") &&
        !apply(agent.q1_target, "q1t") && !apply(agent.q2_target, "q2t")) {
      throw IoError("unknown checkpoint array: " + name);
    }
  }
  return agent;
}

}  // namespace navfly::sac
