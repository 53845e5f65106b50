// Four-layer recurrent network: tanh dense -> GRU -> tanh dense -> linear.
//
// Parameters live in one flat vector so optimizers, checkpoints and finite
// difference checks can treat them uniformly. Flat layout, all matrices
// column-major:
//
//   W1 (h1 x obs)   b1 (h1)
//   Wg (3 h2 x h1)  Ug (3 h2 x h2)  bg (3 h2)     gate rows ordered [z; r; h]
//   W3 (h3 x h2)    b3 (h3)
//   W4 (out x h3)   b4 (out)
//
// GRU convention:
//   z = sig(Wz x + Uz h + bz),  r = sig(Wr x + Ur h + br)
//   c = tanh(Wh x + Uh (r . h) + bh),  h' = (1 - z) . h + z . c
#pragma once

#include "homing/common/random.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace homing::nn {

struct NetworkShape {
  int obs_dim = 4;
  int h1 = 40;
  int h2 = 40;
  int h3 = 40;
  int out_dim = 8;

  std::size_t num_params() const;
  bool operator==(const NetworkShape&) const = default;
};

/// Policy sizes: h1 = 10 obs, h3 = 10 act, h2 = round(sqrt(h1 h3)), two logits per action.
NetworkShape policy_shape(int obs_dim = 4, int act_dim = 4);
/// Value sizes: h1 = 10 obs, h3 = 5, h2 = round(sqrt(h1 h3)), scalar output.
NetworkShape value_shape(int obs_dim = 4);

/// Per-step activations kept by forward_sequence for backpropagation.
struct SequenceTrace {
  Eigen::MatrixXd x;       // obs_dim x T (after input scaling)
  Eigen::MatrixXd y1;      // h1 x T
  Eigen::MatrixXd h_prev;  // h2 x T
  Eigen::MatrixXd z, r, c; // h2 x T
  Eigen::MatrixXd h;       // h2 x T
  Eigen::MatrixXd y3;      // h3 x T
  Eigen::MatrixXd out;     // out_dim x T

  int steps() const { return static_cast<int>(x.cols()); }
};

class RecurrentNet {
 public:
  explicit RecurrentNet(NetworkShape shape);

  const NetworkShape& shape() const { return shape_; }
  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Fixed affine input map x = scale . obs + offset (identity by default).
  Eigen::VectorXd& input_scale() { return input_scale_; }
  Eigen::VectorXd& input_offset() { return input_offset_; }
  const Eigen::VectorXd& input_scale() const { return input_scale_; }
  const Eigen::VectorXd& input_offset() const { return input_offset_; }

  /// Uniform +-sqrt(1/fan_in) weights, zero biases.
  void initialize(Rng& rng);

  Eigen::VectorXd initial_hidden() const { return Eigen::VectorXd::Zero(shape_.h2); }

  // Single step for rollouts; `hidden` is advanced in place. Throws
  // kNumeric on non-finite input.
  Eigen::VectorXd step(std::span<const double> obs, Eigen::VectorXd& hidden) const;

  // Runs a whole episode from a zero hidden state, recording activations.
  // obs is obs_dim x T.
  SequenceTrace forward_sequence(const Eigen::MatrixXd& obs) const;

  // Reverse-mode gradients through time. d_out is out_dim x T (dLoss/dOutput
  // per step); results are accumulated into grad (size num_params()).
  void backward(const SequenceTrace& trace, const Eigen::MatrixXd& d_out,
                std::span<double> grad) const;

 private:
  NetworkShape shape_;
  std::vector<double> params_;
  Eigen::VectorXd input_scale_;
  Eigen::VectorXd input_offset_;
};

}  // namespace homing::nn
