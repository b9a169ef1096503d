#pragma once

#include <Eigen/Core>
#include <vector>

#include "navfly/rng.hpp"

namespace navfly::sac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense net with tanh hidden activations and a linear output layer.
/// Weights are [out x in]; batches are column-major (one sample per column)
/// so layer application is a single gemm.
struct Mlp {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;

  /// Xavier-uniform init; `final_scale` shrinks the output layer (useful
  /// for near-zero initial policy means).
  static Mlp make(const std::vector<int>& sizes, Rng& rng, double final_scale = 1.0);

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  MatrixXd forward(const MatrixXd& x) const;
};

/// Post-activation values per layer, kept for the backward pass.
/// activations[0] is the input batch; activations.back() is the output.
struct MlpCache {
  std::vector<MatrixXd> activations;
};

MatrixXd forward(const Mlp& net, const MatrixXd& x, MlpCache& cache);

struct MlpGrads {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;

  static MlpGrads zeros_like(const Mlp& net);
  void scale(double s);
  double max_abs() const;
};

/// Backprop of dL/dy through the net. Accumulates parameter gradients into
/// `grads` and returns dL/dx.
MatrixXd backward(const Mlp& net, const MlpCache& cache, const MatrixXd& dy, MlpGrads& grads);

/// Input gradient only; parameters are treated as frozen.
MatrixXd backward_input(const Mlp& net, const MlpCache& cache, const MatrixXd& dy);

/// Adam on the Mlp parameter set.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr);
  void step(Mlp& net, const MlpGrads& grads);
  double lr() const { return lr_; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  MlpGrads m_, v_;
};

/// Adam on a single scalar (the log entropy coefficient).
class ScalarAdam {
 public:
  explicit ScalarAdam(double lr = 3e-4) : lr_(lr) {}
  void step(double& value, double grad);

 private:
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  double m_ = 0.0;
  double v_ = 0.0;
};

}  // namespace navfly::sac
