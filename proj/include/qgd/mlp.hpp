#pragma once

// Fully connected feed-forward network with hand-written reverse-mode
// gradients. Weights are stored out x in, so layer l computes
// z = W_l a + b_l followed by the hidden activation (identity at the output
// unless `activate_output` is set, which truncated neuron nets use).

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace qgd {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ActivationKind { ReLU, ELU, Identity };

struct Activation {
  ActivationKind kind = ActivationKind::ReLU;
  double alpha = 1.0;  // ELU only

  static Activation relu() { return {ActivationKind::ReLU, 1.0}; }
  static Activation elu(double alpha) { return {ActivationKind::ELU, alpha}; }
  static Activation identity() { return {ActivationKind::Identity, 1.0}; }

  double apply(double z) const;
  double derivative(double z) const;
  friend bool operator==(const Activation&, const Activation&) = default;
};

std::string activation_name(const Activation& a);
/// "relu", "identity", "elu" (alpha 1) or "elu:<alpha>".
Activation parse_activation(std::string_view text);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct Mlp {
  std::vector<int> layer_sizes;
  Activation activation;
  bool activate_output = false;
  std::uint64_t seed = 0;
  std::vector<DenseLayer> layers;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(layers.size()); }
  std::size_t num_parameters() const;
  /// FNV-1a over the raw parameter bytes; used to verify a model stays frozen.
  std::uint64_t checksum() const;
  void validate() const;
};

/// Fan-in uniform initialization: every weight and bias of a layer with
/// fan-in n is drawn from U(-sqrt(1/n), sqrt(1/n)).
Mlp init_mlp(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed);

struct ForwardTrace {
  /// activations[0] is the input; activations[l + 1] is the post-activation
  /// of layer l. pre_activations[l] is layer l's affine output.
  std::vector<Eigen::VectorXd> pre_activations;
  std::vector<Eigen::VectorXd> activations;
  double output = 0.0;
};

ForwardTrace forward(const Mlp& m, std::span<const double> x);
double predict(const Mlp& m, std::span<const double> x);
/// Column-per-example forward pass; returns one output per column.
Eigen::RowVectorXd predict_batch(const Mlp& m, const Eigen::MatrixXd& inputs);

struct ParamGradients {
  std::vector<DenseLayer> layers;
  double loss = 0.0;  // MSE of the batch
};

/// Exact gradients of (1/N) sum (f(x) - y)^2; inputs has one column per example.
ParamGradients param_gradients(const Mlp& m, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& labels);

/// d output / d input, parameters untouched.
Eigen::VectorXd input_gradient(const Mlp& m, std::span<const double> x);

struct NeuronSelector {
  int layer = 1;   // 1..num_layers(); num_layers() is the output layer
  int neuron = 0;  // index within that layer
};

/// Sub-network whose scalar output is the selected neuron's post-activation
/// (the raw output for the output layer).
Mlp truncate_at_neuron(const Mlp& m, NeuronSelector sel);

/// Every parameter block of `m` as a flat span, in layer order
/// (weights then bias).
std::vector<std::span<double>> parameter_blocks(Mlp& m);
std::vector<std::span<const double>> parameter_blocks(const ParamGradients& g);

}  // namespace qgd
