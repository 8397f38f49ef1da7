#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gridssa {

/// Classifier layout: one convolutional layer along the aggregation axis
/// followed by three fully connected layers, the last of width 1 feeding a
/// sigmoid.
///
/// The convolution is per-channel: each of the F*n_nodes input channels is
/// filtered independently by conv_filters kernels of width conv_kernel
/// (valid padding, stride 1, no bias term, mirroring the additive-free
/// graph-filter form). The FC layers carry biases.
///
/// Parameter accounting, pinned by unit test: for neurons [2, 4, 5, 1] at
/// K = 3 (rows = 5), F = 3, one aggregation node, kernel 3:
///   conv 3*3*2 = 18, fc1 18*4+4 = 76, fc2 4*5+5 = 25, fc3 5*1+1 = 6,
/// total 125.
struct ModelSpec {
  int conv_filters = 2;
  int conv_kernel = 3;
  std::array<int, 3> fc_sizes = {4, 5, 1};
  int rows = 5;      // K + 2
  int features = 3;  // F
  int n_nodes = 1;   // aggregation nodes

  int channels() const { return features * n_nodes; }
  int conv_out_len() const { return rows - conv_kernel + 1; }
  int conv_channels() const { return channels() * conv_filters; }
  int flatten_size() const { return conv_channels() * conv_out_len(); }
  int k_len() const { return rows - 2; }

  long conv_weight_count() const {
    return static_cast<long>(channels()) * conv_filters * conv_kernel;
  }
  long parameter_count() const;
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

/// All trainable parameters in one flat vector (layout: conv weights, then
/// per FC layer row-major weights followed by biases), plus frozen input
/// standardization constants that are set at training time and are not
/// trainable parameters.
struct ModelParams {
  ModelSpec spec;
  std::vector<double> theta;
  Eigen::MatrixXd input_shift;  // rows x channels, default zeros
  Eigen::MatrixXd input_scale;  // rows x channels, default ones

  long parameter_count() const { return spec.parameter_count(); }
};

/// Fan-in-scaled uniform init, biases zero, deterministic per seed.
ModelParams init_model(const ModelSpec& spec, std::uint64_t seed);

/// Forward pass on a (rows x channels) feature matrix; strictly in (0, 1).
double predict(const ModelParams& params, const Eigen::MatrixXd& input);

/// Mean binary cross entropy with probabilities clamped to
/// [1e-12, 1 - 1e-12]; rejects empty input.
double bce_loss(const std::vector<double>& probs,
                const std::vector<int>& labels);

/// Exact analytic gradient of the mean BCE over the batch with respect to
/// every entry of theta.
std::vector<double> gradients(
    const ModelParams& params,
    const std::vector<const Eigen::MatrixXd*>& batch,
    const std::vector<int>& labels);

/// Loss-only helper used by gradient checks and the trainer.
double batch_loss(const ModelParams& params,
                  const std::vector<const Eigen::MatrixXd*>& batch,
                  const std::vector<int>& labels);

/// Versioned binary round-trip: restore(persist(m)) == m bit-exactly.
std::string persist_model(const ModelParams& params);
ModelParams restore_model(const std::string& bytes);

constexpr double kBceEps = 1e-12;

}  // namespace gridssa
