#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "navfly/errors.hpp"
#include "navfly/sac.hpp"

using namespace navfly;
using namespace navfly::sac;

namespace {

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

Batch make_batch(int obs_dim, int act_dim, int n, Rng& rng) {
  Batch b;
  b.s.resize(obs_dim, n);
  b.a.resize(act_dim, n);
  b.s_next.resize(obs_dim, n);
  b.r.resize(n);
  b.d.resize(n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < obs_dim; ++r) {
      b.s(r, c) = rng.uniform(-1, 1);
      b.s_next(r, c) = rng.uniform(-1, 1);
    }
    for (int r = 0; r < act_dim; ++r) b.a(r, c) = rng.uniform(-0.9, 0.9);
    b.r[c] = rng.uniform(-2, 2);
    b.d[c] = rng.uniform() < 0.3 ? 1.0 : 0.0;
  }
  return b;
}

/// Scalar-math replica of the tanh-Gaussian log density, independent of
/// the Eigen implementation path.
double scalar_log_prob(double eps, double log_std, double u, double limit) {
  const double au = std::abs(u);
  const double log1m_tanh2 = 2.0 * (std::log(2.0) - au - std::log1p(std::exp(-2.0 * au)));
  return -0.5 * eps * eps - log_std - 0.5 * std::log(2.0 * M_PI) - std::log(limit) -
         log1m_tanh2;
}

}  // namespace

TEST_CASE("terminal target is bit-equal to the reward") {
  Rng rng(0);
  VectorXd limits = VectorXd::Constant(3, 1.0);
  SacConfig cfg;
  cfg.hidden = {8};
  SacAgent agent = SacAgent::make(4, 3, cfg, 1, limits);

  Batch b = make_batch(4, 3, 16, rng);
  b.d.setOnes();
  b.r[0] = 2.5;
  b.r[1] = -0.0;  // negative zero must survive untouched
  Rng trng(9);
  const VectorXd y =
      target_value(b, agent.q1_target, agent.q2_target, agent.actor, 0.2, 0.99, trng);
  for (int i = 0; i < b.size(); ++i) CHECK(bit_equal(y[i], b.r[i]));
  CHECK(y[0] == 2.5);
  CHECK(std::signbit(y[1]));
}

TEST_CASE("zero discount collapses the target to the reward") {
  Rng rng(4);
  SacConfig cfg;
  cfg.hidden = {8};
  SacAgent agent = SacAgent::make(4, 3, cfg, 2, VectorXd::Constant(3, 1.0));
  Batch b = make_batch(4, 3, 8, rng);
  b.d.setZero();
  b.r.setConstant(1.0);
  Rng trng(10);
  const VectorXd y =
      target_value(b, agent.q1_target, agent.q2_target, agent.actor, 0.2, 0.0, trng);
  for (int i = 0; i < b.size(); ++i) CHECK(y[i] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("target matches a scalar hand computation on fixed tiny nets") {
  // 1-D observation, 1-D action, purely linear heads with known weights.
  const double limit = 2.0;
  Rng init(0);
  GaussianActor actor = GaussianActor::make(1, 1, {}, VectorXd::Constant(1, limit), init);
  actor.net.weights[0].setZero();
  actor.net.weights[0](0, 0) = 0.4;   // mean head
  actor.net.weights[0](1, 0) = -0.3;  // rho head
  actor.net.biases[0] << 0.1, 0.2;

  Mlp q1t = Mlp::make({2, 1}, init);
  q1t.weights[0] << 0.7, -0.2;
  q1t.biases[0] << 0.05;
  Mlp q2t = Mlp::make({2, 1}, init);
  q2t.weights[0] << 0.6, 0.3;
  q2t.biases[0] << -0.1;

  Batch b;
  b.s.resize(1, 2);
  b.s << 0.5, -0.8;
  b.a = MatrixXd::Zero(1, 2);
  b.s_next.resize(1, 2);
  b.s_next << -0.2, 0.9;
  b.r.resize(2);
  b.r << 1.0, -0.5;
  b.d.resize(2);
  b.d << 0.0, 0.0;

  const double alpha = 0.17;
  const double gamma = 0.97;
  const std::uint64_t seed = 2024;

  // Replicate the eps draws target_value will consume.
  Rng eps_rng(seed);
  const MatrixXd eps = standard_normal(1, 2, eps_rng);

  VectorXd expected(2);
  for (int i = 0; i < 2; ++i) {
    const double s_next = b.s_next(0, i);
    const double mean = 0.4 * s_next + 0.1;
    const double rho = -0.3 * s_next + 0.2;
    const double log_std = 0.5 * (2.0 + -5.0) + 0.5 * (2.0 - -5.0) * std::tanh(rho);
    const double sigma = std::exp(log_std);
    const double u = mean + sigma * eps(0, i);
    const double a = limit * std::tanh(u);
    const double lp = scalar_log_prob(eps(0, i), log_std, u, limit);
    const double q1v = 0.7 * s_next + -0.2 * a + 0.05;
    const double q2v = 0.6 * s_next + 0.3 * a + -0.1;
    expected[i] = b.r[i] + gamma * (std::min(q1v, q2v) - alpha * lp);
  }

  Rng trng(seed);
  const VectorXd y = target_value(b, q1t, q2t, actor, alpha, gamma, trng);
  CHECK(std::abs(y[0] - expected[0]) < 1e-12);
  CHECK(std::abs(y[1] - expected[1]) < 1e-12);
}

TEST_CASE("critic loss: zero at the target, arithmetic on one sample") {
  Rng init(1);
  // Constant critics: zero weights, bias 3 -> Q == 3 everywhere.
  Mlp q1 = Mlp::make({5, 1}, init);
  q1.weights[0].setZero();
  q1.biases[0] << 3.0;
  Mlp q2 = q1;

  Batch b;
  b.s = MatrixXd::Zero(2, 1);
  b.a = MatrixXd::Zero(3, 1);
  b.s_next = b.s;
  b.r = VectorXd::Zero(1);
  b.d = VectorXd::Zero(1);

  SUBCASE("Q == y everywhere") {
    const VectorXd y = VectorXd::Constant(1, 3.0);
    const auto res = critic_loss(b, q1, q2, y);
    CHECK(res.loss == 0.0);
    CHECK(res.grads_q1.max_abs() == 0.0);
    CHECK(res.grads_q2.max_abs() == 0.0);
  }
  SUBCASE("single sample, Q=3, y=1") {
    const VectorXd y = VectorXd::Constant(1, 1.0);
    const auto res = critic_loss(b, q1, q2, y);
    CHECK(res.loss == doctest::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("critic gradients match central finite differences") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(Rng::mix(77, seed));
    const int obs = 3, act = 2, n = 5;
    Rng init(Rng::mix(78, seed));
    Mlp q1 = Mlp::make({obs + act, 6, 1}, init);
    Mlp q2 = Mlp::make({obs + act, 6, 1}, init);
    Batch b = make_batch(obs, act, n, rng);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(-2, 2);

    const auto res = critic_loss(b, q1, q2, y);
    const auto check_net = [&](Mlp& net, const MlpGrads& grads) {
      for (std::size_t l = 0; l < net.weights.size(); ++l) {
        auto probe = [&](double& p, double analytic) {
          const double saved = p;
          const double h = 1e-5;
          p = saved + h;
          const double up = critic_loss(b, q1, q2, y).loss;
          p = saved - h;
          const double down = critic_loss(b, q1, q2, y).loss;
          p = saved;
          CHECK(rel_err(analytic, (up - down) / (2.0 * h)) < 1e-4);
        };
        for (int r = 0; r < net.weights[l].rows(); ++r) {
          for (int c = 0; c < net.weights[l].cols(); ++c) {
            probe(net.weights[l](r, c), grads.weights[l](r, c));
          }
        }
        for (int r = 0; r < net.biases[l].size(); ++r) {
          probe(net.biases[l](r), grads.biases[l](r));
        }
      }
    };
    check_net(q1, res.grads_q1);
    check_net(q2, res.grads_q2);
  }
}

TEST_CASE("actor loss: constant critics and zero alpha give zero gradient") {
  Rng init(3);
  GaussianActor actor = GaussianActor::make(3, 2, {6}, VectorXd::Constant(2, 1.5), init);
  Mlp q1 = Mlp::make({5, 1}, init);
  q1.weights[0].setZero();
  q1.biases[0] << 4.2;
  Mlp q2 = q1;

  Rng rng(8);
  Batch b = make_batch(3, 2, 9, rng);
  const MatrixXd eps = standard_normal(2, 9, rng);
  const auto res = actor_loss(b, q1, q2, actor, 0.0, eps);
  CHECK(res.loss == doctest::Approx(-4.2).epsilon(1e-12));
  CHECK(res.grads.max_abs() == 0.0);
}

TEST_CASE("deterministic limit: actor loss equals -Q(mean action) on a linear critic") {
  Rng init(5);
  GaussianActor actor = GaussianActor::make(2, 1, {4}, VectorXd::Constant(1, 2.0), init);
  Mlp q1 = Mlp::make({3, 1}, init);
  q1.weights[0] << 0.3, -0.8, 1.1;  // linear in (s, a)
  q1.biases[0] << 0.25;
  Mlp q2 = q1;

  Rng rng(6);
  Batch b = make_batch(2, 1, 5, rng);
  const MatrixXd eps = MatrixXd::Zero(1, 5);  // exact deterministic limit
  const auto res = actor_loss(b, q1, q2, actor, 0.0, eps);

  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    const VectorXd mean_a = actor.mean_action(b.s.col(i));
    VectorXd x(3);
    x << b.s(0, i), b.s(1, i), mean_a[0];
    expected += -q1.forward(x)(0) / 5.0;
  }
  CHECK(res.loss == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("actor gradients match central finite differences") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(Rng::mix(31, seed));
    const int obs = 3, act = 2, n = 4;
    Rng init(Rng::mix(32, seed));
    GaussianActor actor = GaussianActor::make(obs, act, {5}, VectorXd::Constant(act, 1.5), init);
    Mlp q1 = Mlp::make({obs + act, 6, 1}, init);
    Mlp q2 = Mlp::make({obs + act, 6, 1}, init);
    Batch b = make_batch(obs, act, n, rng);
    const MatrixXd eps = standard_normal(act, n, rng);
    const double alpha = 0.3;

    const auto res = actor_loss(b, q1, q2, actor, alpha, eps);
    for (std::size_t l = 0; l < actor.net.weights.size(); ++l) {
      auto probe = [&](double& p, double analytic) {
        const double saved = p;
        const double h = 1e-5;
        p = saved + h;
        const double up = actor_loss(b, q1, q2, actor, alpha, eps).loss;
        p = saved - h;
        const double down = actor_loss(b, q1, q2, actor, alpha, eps).loss;
        p = saved;
        CHECK(rel_err(analytic, (up - down) / (2.0 * h)) < 1e-4);
      };
      for (int r = 0; r < actor.net.weights[l].rows(); ++r) {
        for (int c = 0; c < actor.net.weights[l].cols(); ++c) {
          probe(actor.net.weights[l](r, c), res.grads.weights[l](r, c));
        }
      }
      for (int r = 0; r < actor.net.biases[l].size(); ++r) {
        probe(actor.net.biases[l](r), res.grads.biases[l](r));
      }
    }
  }
}

TEST_CASE("alpha loss: fixed point, descent direction, finite differences") {
  const double h_target = -3.0;

  SUBCASE("log pi at the negated target is a fixed point") {
    const VectorXd log_pi = VectorXd::Constant(6, -h_target);
    CHECK(alpha_loss(log_pi, 0.2, h_target).grad_log_alpha == 0.0);
  }
  SUBCASE("entropy above target shrinks alpha") {
    // high entropy <=> log pi very negative <=> log_pi + H < 0
    const VectorXd log_pi = VectorXd::Constant(6, -10.0);
    SacConfig cfg;
    cfg.hidden = {4};
    Rng rng(1);
    SacAgent agent = SacAgent::make(2, 3, cfg, 3, VectorXd::Constant(3, 1.0));
    const double before = agent.log_alpha;
    const auto res = alpha_loss(log_pi, agent.alpha(), h_target);
    CHECK(res.grad_log_alpha > 0.0);
    agent.alpha_opt.step(agent.log_alpha, res.grad_log_alpha);
    CHECK(agent.log_alpha < before);
  }
  SUBCASE("gradient on log alpha matches finite differences") {
    Rng rng(12);
    VectorXd log_pi(8);
    for (int i = 0; i < 8; ++i) log_pi[i] = rng.uniform(-6, 2);
    const double log_alpha = std::log(0.37);
    const double analytic = alpha_loss(log_pi, std::exp(log_alpha), h_target).grad_log_alpha;
    const double h = 1e-6;
    const double up = alpha_loss(log_pi, std::exp(log_alpha + h), h_target).loss;
    const double down = alpha_loss(log_pi, std::exp(log_alpha - h), h_target).loss;
    CHECK(std::abs(analytic - (up - down) / (2.0 * h)) < 1e-6);
  }
}

TEST_CASE("tanh-squashed density integrates to one in 1-D") {
  Rng init(21);
  const double limit = 3.0;
  GaussianActor actor = GaussianActor::make(2, 1, {6}, VectorXd::Constant(1, limit), init);
  MatrixXd obs(2, 1);
  obs << 0.4, -0.7;

  // Probe mean and std at this observation.
  const ActorSample probe = sample_actions(actor, obs, MatrixXd::Zero(1, 1));
  const double mu = probe.mean(0, 0);
  const double sigma = probe.std_dev(0, 0);

  // Integrate the action-space density over a = limit*tanh(u) by the
  // change of variables da = limit*(1 - tanh^2 u) du.
  const int n = 6000;
  const double lo = mu - 10.0 * sigma;
  const double hi = mu + 10.0 * sigma;
  const double du = (hi - lo) / n;
  double integral = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = lo + (i + 0.5) * du;
    MatrixXd eps(1, 1);
    eps << (u - mu) / sigma;
    const ActorSample s = sample_actions(actor, obs, eps);
    const double tu = std::tanh(u);
    integral += std::exp(s.log_prob[0]) * limit * (1.0 - tu * tu) * du;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("replay buffer: ring semantics and the insufficient-data error") {
  ReplayBuffer buffer(4);
  Rng rng(1);
  CHECK_THROWS_AS(buffer.sample(1, rng), TrainingError);
  for (int i = 0; i < 6; ++i) {
    Transition t;
    t.s = VectorXd::Constant(1, i);
    t.a = VectorXd::Zero(1);
    t.s_next = t.s;
    t.r = i;
    buffer.push(t);
  }
  CHECK(buffer.size() == 4);
  CHECK_THROWS_AS(buffer.sample(5, rng), TrainingError);
  const Batch b = buffer.sample(4, rng);
  for (int i = 0; i < 4; ++i) CHECK(b.r[i] >= 2.0);  // 0 and 1 were overwritten
}

TEST_CASE("target networks follow the exact polyak recursion, never gradients") {
  SacConfig cfg;
  cfg.hidden = {8};
  cfg.batch_size = 16;
  SacAgent agent = SacAgent::make(3, 2, cfg, 11, VectorXd::Constant(2, 1.0));
  ReplayBuffer buffer(256);
  Rng rng(2);
  for (int i = 0; i < 64; ++i) {
    Transition t;
    t.s = VectorXd::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(-1, 1); });
    t.a = VectorXd::NullaryExpr(2, [&](Eigen::Index) { return rng.uniform(-1, 1); });
    t.s_next = VectorXd::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(-1, 1); });
    t.r = rng.uniform(-1, 1);
    t.d = 0.0;
    buffer.push(t);
  }

  Mlp shadow1 = agent.q1_target;
  Mlp shadow2 = agent.q2_target;
  for (int step = 0; step < 10; ++step) {
    train_step(agent, buffer);
    polyak_update(shadow1, agent.q1, cfg.polyak);
    polyak_update(shadow2, agent.q2, cfg.polyak);
  }
  for (std::size_t l = 0; l < shadow1.weights.size(); ++l) {
    CHECK((shadow1.weights[l] - agent.q1_target.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((shadow2.weights[l] - agent.q2_target.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((shadow1.biases[l] - agent.q1_target.biases[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("seeded training is deterministic") {
  const auto run = [] {
    SacConfig cfg;
    cfg.hidden = {8};
    cfg.batch_size = 8;
    SacAgent agent = SacAgent::make(3, 2, cfg, 5, VectorXd::Constant(2, 1.0));
    ReplayBuffer buffer(128);
    Rng rng(6);
    for (int i = 0; i < 32; ++i) {
      Transition t;
      t.s = VectorXd::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(-1, 1); });
      t.a = VectorXd::NullaryExpr(2, [&](Eigen::Index) { return rng.uniform(-1, 1); });
      t.s_next = VectorXd::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(-1, 1); });
      t.r = rng.uniform(-1, 1);
      buffer.push(t);
    }
    std::vector<StepDiagnostics> diags;
    for (int step = 0; step < 30; ++step) diags.push_back(train_step(agent, buffer));
    return diags;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(bit_equal(a[i].critic_loss, b[i].critic_loss));
    CHECK(bit_equal(a[i].actor_loss, b[i].actor_loss));
    CHECK(bit_equal(a[i].alpha, b[i].alpha));
  }
}

TEST_CASE("toy MDP: the policy mean converges to the analytic optimum") {
  // Single state, one action dimension, reward -a^2: the optimum is 0.
  SacConfig cfg;
  cfg.hidden = {16, 16};
  cfg.batch_size = 64;
  cfg.target_entropy = -1.0;
  cfg.lr_actor = 1e-3;
  cfg.lr_critic = 1e-3;
  cfg.lr_alpha = 1e-3;
  cfg.warmup_steps = 300;
  SacAgent agent = SacAgent::make(1, 1, cfg, 17, VectorXd::Constant(1, 1.0));
  ReplayBuffer buffer(5000);
  Rng env(23);
  const VectorXd s = VectorXd::Zero(1);

  for (int step = 0; step < 5000; ++step) {
    double a;
    if (step < cfg.warmup_steps) {
      a = env.uniform(-1, 1);
    } else {
      const MatrixXd eps = standard_normal(1, 1, env);
      a = sample_actions(agent.actor, s, eps).actions(0, 0);
    }
    Transition t;
    t.s = s;
    t.a = VectorXd::Constant(1, a);
    t.r = -a * a;
    t.s_next = s;
    t.d = 0.0;
    buffer.push(t);
    if (step >= cfg.warmup_steps) train_step(agent, buffer);
  }
  CHECK(std::abs(agent.actor.mean_action(s)[0]) < 0.05);
}

TEST_CASE("checkpoint round trip preserves the policy") {
  SacConfig cfg;
  cfg.hidden = {16, 16};
  SacAgent agent = SacAgent::make(kFeatureDim, 3, cfg, 31, navigation_action_limits());
  agent.log_alpha = -1.234;
  const auto path =
      (std::filesystem::temp_directory_path() / "navfly_ckpt_test.bin").string();
  save_checkpoint(agent, path);
  const SacAgent loaded = load_checkpoint(path);

  CHECK(loaded.obs_dim == agent.obs_dim);
  CHECK(loaded.act_dim == agent.act_dim);
  CHECK(loaded.log_alpha == agent.log_alpha);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    VectorXd obs = VectorXd::NullaryExpr(kFeatureDim, [&](Eigen::Index) {
      return rng.uniform(0, 1);
    });
    const VectorXd a = agent.actor.mean_action(obs);
    const VectorXd b = loaded.actor.mean_action(obs);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
  for (std::size_t l = 0; l < agent.q1_target.weights.size(); ++l) {
    CHECK((loaded.q1_target.weights[l] - agent.q1_target.weights[l]).cwiseAbs().maxCoeff() ==
          0.0);
  }

  SUBCASE("corrupt magic is rejected") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
    f.close();
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
  }
  SUBCASE("truncation is rejected") {
    std::error_code ec;
    std::filesystem::resize_file(path, 40, ec);
    REQUIRE_FALSE(ec);
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("features have the documented layout") {
  world::DepthImage depth;
  depth.width = 32;
  depth.height = 24;
  depth.max_range = 50.0;
  depth.ranges.assign(32 * 24, 25.0f);
  world::UavState st;
  st.position = world::Vec3(0, 0, 5.0);
  st.yaw = 0.0;
  const VectorXd f = build_features(depth, st, M_PI / 2.0);
  REQUIRE(f.size() == kFeatureDim);
  for (int i = 0; i < kPoolW * kPoolH; ++i) CHECK(f[i] == doctest::Approx(0.5));
  CHECK(f[48] == doctest::Approx(1.0));   // sin(pi/2)
  CHECK(f[49] == doctest::Approx(0.0));   // cos(pi/2)
  CHECK(f[50] == doctest::Approx(0.5));   // z / 10
}

TEST_CASE("collect_training_episode: spawn at the goal threshold succeeds immediately") {
  world::Scene scene;
  scene.side_length = 70.0;
  world::TargetInstance goal;
  goal.id = 0;
  goal.label = "red sports car";
  goal.position = world::Vec3(65, 35, 1);
  scene.targets.push_back(goal);
  scene.goal_target_id = 0;
  scene.spawn_zone = {{0, 0}, {70, 5}};

  SacConfig cfg;
  cfg.hidden = {8};
  SacAgent agent = SacAgent::make(kFeatureDim, 3, cfg, 3, navigation_action_limits());
  // Force a decisive forward mean so the commanded velocity aligns.
  agent.actor.net.weights.back().setZero();
  agent.actor.net.biases.back().setZero();
  agent.actor.net.biases.back()(0) = 2.0;

  world::UavState start;
  start.position = world::Vec3(60.5, 35, 2.0);  // 4.5 m out, inside the 5 m shell
  start.yaw = 0.0;
  Rng rng(5);
  const auto result = collect_training_episode(scene, agent, {}, {300, 0.2}, rng,
                                               ActionMode::kMean, &start);
  CHECK(result.outcome.termination == eval::Termination::kSuccess);
  CHECK(result.outcome.steps == 1);
  REQUIRE(result.transitions.size() == 1);
  CHECK(result.transitions[0].d == 1.0);
  CHECK(result.transitions[0].r > 9.0);  // success bonus dominates
}

TEST_CASE("random-weight agent is statistically a random-action baseline") {
  const world::Scene scene = world::generate_scene(55, {});
  SacConfig cfg;
  cfg.hidden = {16, 16};
  SacAgent agent = SacAgent::make(kFeatureDim, 3, cfg, 7, navigation_action_limits());

  int success_agent = 0, success_uniform = 0;
  Rng rng_a(100), rng_b(200);
  const int episodes = 100;
  for (int i = 0; i < episodes; ++i) {
    const auto a =
        collect_training_episode(scene, agent, {}, {120, 0.2}, rng_a, ActionMode::kStochastic);
    if (a.outcome.termination == eval::Termination::kSuccess) ++success_agent;
    const auto b =
        collect_training_episode(scene, agent, {}, {120, 0.2}, rng_b, ActionMode::kUniform);
    if (b.outcome.termination == eval::Termination::kSuccess) ++success_uniform;
  }
  CHECK(std::abs(success_agent - success_uniform) <= episodes / 20);  // within 5%
}

TEST_CASE("SacPolicy in eval mode is deterministic") {
  SacConfig cfg;
  cfg.hidden = {16};
  SacAgent agent = SacAgent::make(kFeatureDim, 3, cfg, 9, navigation_action_limits());
  SacPolicy pol(agent.actor, world::Vec3(65, 35, 1), /*deterministic=*/true, 0);

  policy::PolicyInput in;
  in.state.position = world::Vec3(10, 35, 2);
  in.state.yaw = 0.1;
  in.depth.width = 32;
  in.depth.height = 24;
  in.depth.ranges.assign(32 * 24, 30.0f);
  in.instruction = "reach the red sports car";
  const auto a = pol.act(in);
  const auto b = pol.act(in);
  CHECK(a.action.forward_mps == b.action.forward_mps);
  CHECK(a.action.yaw_rate_radps == b.action.yaw_rate_radps);
  CHECK(a.action.vertical_mps == b.action.vertical_mps);
}
