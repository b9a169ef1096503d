#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "navfly/mlp.hpp"

using namespace navfly;
using namespace navfly::sac;

namespace {

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

/// Central finite difference of a scalar function of one parameter.
template <typename LossFn>
double fd(double& param, const LossFn& loss, double h = 1e-6) {
  const double saved = param;
  param = saved + h;
  const double up = loss();
  param = saved - h;
  const double down = loss();
  param = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("forward matches a hand-computed two-layer net") {
  Rng rng(1);
  Mlp net = Mlp::make({2, 2, 1}, rng);
  net.weights[0] << 0.5, -0.25, 1.0, 0.75;
  net.biases[0] << 0.1, -0.2;
  net.weights[1] << 2.0, -1.0;
  net.biases[1] << 0.05;

  VectorXd x(2);
  x << 0.3, -0.6;
  const double h0 = std::tanh(0.5 * 0.3 + (-0.25) * (-0.6) + 0.1);
  const double h1 = std::tanh(1.0 * 0.3 + 0.75 * (-0.6) - 0.2);
  const double expected = 2.0 * h0 - 1.0 * h1 + 0.05;
  CHECK(net.forward(x)(0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("backward gradients match central finite differences") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(seed);
    Mlp net = Mlp::make({3, 5, 4, 2}, rng);
    const int batch = 7;
    MatrixXd x(3, batch);
    for (int c = 0; c < batch; ++c) {
      for (int r = 0; r < 3; ++r) x(r, c) = rng.uniform(-1, 1);
    }
    MatrixXd target(2, batch);
    for (int c = 0; c < batch; ++c) {
      for (int r = 0; r < 2; ++r) target(r, c) = rng.uniform(-1, 1);
    }

    const auto loss_value = [&] {
      const MatrixXd y = net.forward(x);
      return 0.5 * (y - target).array().square().sum();
    };

    MlpCache cache;
    const MatrixXd y = forward(net, x, cache);
    MlpGrads grads = MlpGrads::zeros_like(net);
    backward(net, cache, (y - target).eval(), grads);

    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      for (int r = 0; r < net.weights[l].rows(); ++r) {
        for (int c = 0; c < net.weights[l].cols(); ++c) {
          const double numeric = fd(net.weights[l](r, c), loss_value);
          CHECK(rel_err(grads.weights[l](r, c), numeric) < 1e-6);
        }
      }
      for (int r = 0; r < net.biases[l].size(); ++r) {
        const double numeric = fd(net.biases[l](r), loss_value);
        CHECK(rel_err(grads.biases[l](r), numeric) < 1e-6);
      }
    }
  }
}

TEST_CASE("input gradient matches finite differences and the grad-free path") {
  Rng rng(5);
  Mlp net = Mlp::make({4, 6, 1}, rng);
  MatrixXd x(4, 3);
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 4; ++r) x(r, c) = rng.uniform(-1, 1);
  }
  MlpCache cache;
  forward(net, x, cache);
  MatrixXd dy = MatrixXd::Ones(1, 3);
  MlpGrads grads = MlpGrads::zeros_like(net);
  const MatrixXd dx_full = backward(net, cache, dy, grads);
  const MatrixXd dx_input_only = backward_input(net, cache, dy);
  CHECK((dx_full - dx_input_only).cwiseAbs().maxCoeff() == 0.0);

  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double numeric = fd(x(r, c), [&] { return net.forward(x).sum(); });
      CHECK(rel_err(dx_full(r, c), numeric) < 1e-6);
    }
  }
}

TEST_CASE("adam walks a quadratic downhill") {
  Rng rng(2);
  Mlp net = Mlp::make({1, 1}, rng);
  net.weights[0] << 3.0;
  net.biases[0] << -2.0;
  Adam opt(net, 0.05);
  VectorXd x(1);
  x << 1.0;
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 400; ++i) {
    MlpCache cache;
    const MatrixXd y = forward(net, MatrixXd(x), cache);
    const double loss = 0.5 * y(0, 0) * y(0, 0);
    if (i == 0) first = loss;
    last = loss;
    MlpGrads grads = MlpGrads::zeros_like(net);
    backward(net, cache, y, grads);
    opt.step(net, grads);
  }
  CHECK(last < 1e-4);
  CHECK(first > 0.1);
}

TEST_CASE("parameter count bookkeeping") {
  Rng rng(0);
  const Mlp net = Mlp::make({51, 64, 64, 6}, rng);
  CHECK(net.parameter_count() == 51u * 64 + 64 + 64u * 64 + 64 + 64u * 6 + 6);
  CHECK(net.all_finite());
}
