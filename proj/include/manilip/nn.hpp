#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace manilip {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Two-layer tanh network  f(x) = W2 tanh(W1 x + b1) + b2.
///
/// `layer_sizes` is {input, hidden, output}. Weight k has shape
/// (layer_sizes[k+1] x layer_sizes[k]) and bias k has length layer_sizes[k+1].
/// When `use_bias` is false the biases stay at zero and receive no updates.
struct MlpParams {
  std::vector<int> layer_sizes;
  std::array<Mat, 2> weights;
  std::array<Vec, 2> biases;
  std::uint64_t seed = 0;
  bool use_bias = true;

  int input_dim() const { return layer_sizes.at(0); }
  int hidden_dim() const { return layer_sizes.at(1); }
  int output_dim() const { return layer_sizes.at(2); }

  /// Squared Frobenius norm over every parameter.
  double squared_norm() const;
  bool all_finite() const;
};

/// Same layout as MlpParams; holds d/dtheta of some scalar objective.
struct Gradient {
  std::array<Mat, 2> weights;
  std::array<Vec, 2> biases;

  static Gradient zeros_like(const MlpParams& params);
  Gradient& operator+=(const Gradient& other);
  Gradient& operator*=(double scale);
  double max_abs() const;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
/// Throws InvalidArgument unless `layer_sizes` has exactly three positive entries.
MlpParams mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed, bool use_bias = true);

Vec mlp_forward(const MlpParams& params, const Vec& x);

/// Row i of the result is f(row i of `inputs`). `inputs` is n x D.
Mat mlp_forward_batch(const MlpParams& params, const Mat& inputs);

/// Hidden activations kept from a batch forward pass for reuse in backward.
struct ForwardCache {
  Mat hidden;   ///< n x H
  Mat outputs;  ///< n x O
};

ForwardCache mlp_forward_cached(const MlpParams& params, const Mat& inputs);

/// Gradient of  sum_i weights[i] * <upstream.row(i), f(inputs.row(i))>.
///
/// `inputs` is n x D, `weights` has length n, `upstream` is n x O.
/// An empty batch (n = 0) yields a zero gradient.
Gradient mlp_backward(const MlpParams& params, const Mat& inputs, const Vec& weights,
                      const Mat& upstream);

/// As above, reusing activations from mlp_forward_cached(params, inputs).
Gradient mlp_backward(const MlpParams& params, const Mat& inputs, const ForwardCache& cache,
                      const Vec& weights, const Mat& upstream);

/// theta' = (1 - step * weight_decay) * theta - step * grad.
MlpParams sgd_step(const MlpParams& params, const Gradient& grad, double step,
                   double weight_decay = 0.0);

}  // namespace manilip
