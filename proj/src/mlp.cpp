#include "navfly/mlp.hpp"

#include <cmath>

#include "navfly/errors.hpp"

namespace navfly::sac {

Mlp Mlp::make(const std::vector<int>& sizes, Rng& rng, double final_scale) {
  if (sizes.size() < 2) throw ConfigError("Mlp needs at least input and output sizes");
  Mlp net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / (in + out));
    MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    if (l + 2 == sizes.size()) w *= final_scale;
    net.weights.push_back(std::move(w));
    net.biases.push_back(VectorXd::Zero(out));
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
  }
  return n;
}

bool Mlp::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

MatrixXd Mlp::forward(const MatrixXd& x) const {
  MatrixXd h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    MatrixXd z = (weights[l] * h).colwise() + biases[l];
    if (l + 1 < weights.size()) {
      h = z.array().tanh().matrix();
    } else {
      h = std::move(z);
    }
  }
  return h;
}

MatrixXd forward(const Mlp& net, const MatrixXd& x, MlpCache& cache) {
  cache.activations.clear();
  cache.activations.push_back(x);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    MatrixXd z = (net.weights[l] * cache.activations.back()).colwise() + net.biases[l];
    if (l + 1 < net.weights.size()) {
      cache.activations.push_back(z.array().tanh().matrix());
    } else {
      cache.activations.push_back(std::move(z));
    }
  }
  return cache.activations.back();
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights.push_back(MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.push_back(VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

void MlpGrads::scale(double s) {
  for (auto& w : weights) w *= s;
  for (auto& b : biases) b *= s;
}

double MlpGrads::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases) {
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  }
  return m;
}

namespace {

MatrixXd backward_impl(const Mlp& net, const MlpCache& cache, const MatrixXd& dy,
                       MlpGrads* grads) {
  MatrixXd dz = dy;
  for (std::size_t li = net.weights.size(); li-- > 0;) {
    if (li + 1 < net.weights.size()) {
      // dz currently holds dL/dh for a tanh layer output.
      const MatrixXd& h = cache.activations[li + 1];
      dz = dz.cwiseProduct((1.0 - h.array().square()).matrix());
    }
    if (grads != nullptr) {
      grads->weights[li] += dz * cache.activations[li].transpose();
      grads->biases[li] += dz.rowwise().sum();
    }
    dz = (net.weights[li].transpose() * dz).eval();
  }
  return dz;
}

}  // namespace

MatrixXd backward(const Mlp& net, const MlpCache& cache, const MatrixXd& dy, MlpGrads& grads) {
  return backward_impl(net, cache, dy, &grads);
}

MatrixXd backward_input(const Mlp& net, const MlpCache& cache, const MatrixXd& dy) {
  return backward_impl(net, cache, dy, nullptr);
}

Adam::Adam(const Mlp& net, double lr) : lr_(lr), m_(MlpGrads::zeros_like(net)), v_(MlpGrads::zeros_like(net)) {}

void Adam::step(Mlp& net, const MlpGrads& grads) {
  ++t_;
  const double correction1 = 1.0 - std::pow(beta1_, t_);
  const double correction2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    m_.weights[l] = beta1_ * m_.weights[l] + (1.0 - beta1_) * grads.weights[l];
    v_.weights[l] =
        beta2_ * v_.weights[l] + (1.0 - beta2_) * grads.weights[l].array().square().matrix();
    net.weights[l].array() -= lr_ * (m_.weights[l].array() / correction1) /
                              ((v_.weights[l].array() / correction2).sqrt() + eps_);
    m_.biases[l] = beta1_ * m_.biases[l] + (1.0 - beta1_) * grads.biases[l];
    v_.biases[l] =
        beta2_ * v_.biases[l] + (1.0 - beta2_) * grads.biases[l].array().square().matrix();
    net.biases[l].array() -= lr_ * (m_.biases[l].array() / correction1) /
                             ((v_.biases[l].array() / correction2).sqrt() + eps_);
  }
}

void ScalarAdam::step(double& value, double grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad * grad;
  const double mhat = m_ / (1.0 - std::pow(beta1_, t_));
  const double vhat = v_ / (1.0 - std::pow(beta2_, t_));
  value -= lr_ * mhat / (std::sqrt(vhat) + eps_);
}

}  // namespace navfly::sac
