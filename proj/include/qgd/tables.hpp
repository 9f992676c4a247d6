#pragma once

// Comma-separated artifact tables. Every table starts with a header row; real
// numbers are written with 17 significant digits and missing values are empty.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgd/analysis.hpp"
#include "qgd/dreaming.hpp"
#include "qgd/graph_core.hpp"
#include "qgd/train.hpp"

namespace qgd {

struct TableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_history_csv(std::ostream& out, const TrainHistory& h);
void write_trajectory_csv(std::ostream& out, const DreamTrajectory& t);
void write_ensemble_csv(std::ostream& out, const DreamEnsembleResult& e);
void write_neuron_dreams_csv(std::ostream& out, const std::vector<NeuronDream>& dreams);
void write_entropy_csv(std::ostream& out, const EntropyProfile& p);
void write_entropy_summary_csv(std::ostream& out, const EntropyProfile& p);
void write_activations_csv(std::ostream& out, const WeightedActivationMap& map);
void write_shift_csv(std::ostream& out, const ShiftReport& r);
void write_shift_summary(std::ostream& out, const ShiftReport& r);

/// Rows of an ensemble table that carry both true values.
std::vector<ShiftSample> read_ensemble_csv(std::istream& in);

/// Either 24 numbers separated by commas/whitespace, or a trajectory table,
/// in which case the last snapshot's graph is returned.
QuantumGraph read_graph(std::istream& in);
QuantumGraph load_graph(const std::filesystem::path& path);

}  // namespace qgd
