#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "qgd/dreaming.hpp"
#include "qgd/graph_core.hpp"
#include "qgd/mlp.hpp"

namespace qgd {

struct UndefinedEntropy : std::domain_error {
  using std::domain_error::domain_error;
};

/// Shannon entropy (bits) of `weights` after scaling them to sum to one;
/// 0 log 0 is taken as 0. Throws UndefinedEntropy for an all-zero vector.
double normalized_entropy(std::span<const double> weights);

/// Entropy of the elementwise mean of the arrays, normalized to a
/// distribution over the 48 (direction, ket) cells. The mean is taken first.
double neuron_entropy(std::span<const PMProbabilityArray> arrays);

PMProbabilityArray mean_pm_array(std::span<const PMProbabilityArray> arrays);

struct NeuronEntropy {
  int layer = 1;
  int neuron = 0;
  std::optional<double> entropy;  // empty when the mean PM array is all zero
  double mean_activation_gain = 0.0;
};

struct LayerEntropy {
  int layer = 1;
  double mean = 0.0;
  int counted = 0;
  int excluded = 0;
  bool undefined = false;  // every neuron of the layer was excluded
};

struct EntropyProfile {
  std::vector<NeuronEntropy> per_neuron;  // (layer, neuron) order
  std::vector<LayerEntropy> per_layer;    // one entry per hidden layer
};

/// Dreams on every hidden neuron from `k_inits` starts and reduces the
/// resulting PM arrays to per-neuron and per-layer entropies.
EntropyProfile entropy_profile(const Mlp& m, int k_inits, const DreamConfig& cfg);

struct WeightedActivationEntry {
  int layer = 0;  // transition index: layer 0 maps the input to hidden layer 1
  int from = 0;
  int to = 0;
  double value = 0.0;
};

struct WeightedActivationMap {
  /// values[l](to, from) = |W_l(to, from) * a_l(from)| / global_max
  std::vector<Eigen::MatrixXd> values;
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> mask;
  double global_max = 0.0;
  double total_mass = 0.0;  // sum of all entries before normalization
  double threshold = 0.05;

  std::vector<WeightedActivationEntry> kept_entries() const;
};

WeightedActivationMap weighted_activations(const Mlp& m, std::span<const double> x, double threshold = 0.05);

inline constexpr int kShiftBins = 50;

struct ShiftReport {
  int runs = 0;
  std::array<int, kShiftBins> initial_histogram{};  // uniform bins on [0, 1]
  std::array<int, kShiftBins> final_histogram{};
  double mean_initial = 0.0;
  double mean_final = 0.0;
  double mean_shift = 0.0;
  double max_initial = 0.0;
  double max_final = 0.0;
  double fraction_initial_above_cap = 0.0;
  double fraction_above_cap = 0.0;  // finals strictly above the cap
  double cap = 0.5;
};

/// Per-run (initial, final) true values; runs missing either are skipped.
struct ShiftSample {
  double initial = 0.0;
  double final = 0.0;
};

ShiftReport shift_report(std::span<const ShiftSample> samples, double cap = 0.5);
ShiftReport shift_report(const DreamEnsembleResult& e, double cap = 0.5);

int shift_bin(double value);

}  // namespace qgd
