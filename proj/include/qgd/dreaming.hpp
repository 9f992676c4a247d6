#pragma once

// Inverse training ("dreaming"): with the network frozen, the 24 input edge
// weights are pushed uphill on a chosen neuron's activation. The oracle
// variant climbs the exact property instead of a network prediction.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgd/graph_core.hpp"
#include "qgd/mlp.hpp"

namespace qgd {

enum class AscentRule { Plain, Adam };

struct DreamConfig {
  int steps = 2000;
  double lr = 1e-4;
  int snapshot_stride = 10;
  bool clamp = true;  // project onto [-1, 1] after every step
  std::uint64_t seed = 0;
  AscentRule rule = AscentRule::Plain;

  void validate() const;
};

struct DreamSnapshot {
  int step = 0;
  QuantumGraph graph;
  double predicted = 0.0;
  std::optional<double> true_value;  // empty when the graph was degenerate
};

struct DreamTrajectory {
  std::vector<DreamSnapshot> snapshots;
  /// Oracle runs only: steps whose true value dropped by more than 1e-9.
  int monotonicity_violations = 0;
  int steps_taken = 0;

  const DreamSnapshot& initial() const { return snapshots.front(); }
  const DreamSnapshot& final() const { return snapshots.back(); }
};

/// Gradient ascent of the network output on the input graph. Snapshots are
/// taken at step 0, every `snapshot_stride` steps and after the last step.
DreamTrajectory dream(const Mlp& m, const QuantumGraph& start, Property prop, const DreamConfig& cfg);

/// Same loop driven by the exact property gradient; `predicted` holds the
/// true value. Throws DegenerateState if the graph collapses.
DreamTrajectory dream_oracle(const QuantumGraph& start, Property prop, const DreamConfig& cfg);

/// Starting-graph seed of run `index` in an ensemble seeded with `seed`.
std::uint64_t run_seed(std::uint64_t seed, int index);

struct DreamRun {
  int run = 0;
  std::uint64_t seed = 0;
  QuantumGraph initial_graph;
  QuantumGraph final_graph;
  double initial_predicted = 0.0;
  double final_predicted = 0.0;
  std::optional<double> initial_true;
  std::optional<double> final_true;
  std::string error;  // nonempty when the run failed
};

struct DreamEnsembleResult {
  Property property = Property::GHZFidelity;
  double cap = 0.5;
  std::vector<DreamRun> runs;
  // Summary over runs with both true values present.
  int valid_runs = 0;
  double mean_initial = 0.0;
  double mean_final = 0.0;
  double max_initial = 0.0;
  double max_final = 0.0;
  double fraction_initial_above_cap = 0.0;
  double fraction_final_above_cap = 0.0;
};

DreamEnsembleResult dream_ensemble(const Mlp& m, Property prop, int n_runs, const DreamConfig& cfg,
                                   double cap = 0.5);

struct NeuronDream {
  std::uint64_t seed = 0;
  QuantumGraph final_graph;
  double initial_activation = 0.0;
  double final_activation = 0.0;
  PMProbabilityArray pm;
};

/// Truncates the network at `sel` and dreams from `k_inits` random starts.
std::vector<NeuronDream> dream_neuron(const Mlp& m, NeuronSelector sel, int k_inits, const DreamConfig& cfg);

}  // namespace qgd
