#pragma once

// Binary training corpus, little-endian throughout:
//
//   offset  size  field
//   0       4     magic "QGDD"
//   4       4     u32 version (= 1)
//   8       1     u8 property tag (0 ghz, 1 w, 2 purity)
//   9       8     u64 record count n
//   17      8     u64 generation seed
//   25      100n  n records of 24 f32 edge weights followed by one f32 label

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qgd/graph_core.hpp"
#include "qgd/train.hpp"

namespace qgd {

inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 25;
inline constexpr std::size_t kDatasetRecordBytes = (kNumEdges + 1) * 4;

struct DatasetReadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetVersionError : DatasetReadError {
  DatasetVersionError(std::uint32_t found, std::uint32_t expected);
  std::uint32_t found;
  std::uint32_t expected;
};

struct DatasetWriteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Property property = Property::GHZFidelity;
  std::uint64_t seed = 0;
  std::vector<std::array<float, kNumEdges>> inputs;
  std::vector<float> labels;

  std::size_t size() const { return labels.size(); }
  QuantumGraph graph(std::size_t i) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct GenerateOptions {
  Property property = Property::GHZFidelity;
  std::size_t n = 1000;
  std::optional<double> cap = 0.5;  // keep labels strictly below
  std::uint64_t seed = 0;
  /// Abort once at least `abort_after` candidates were drawn and fewer than
  /// (1 - max_rejection) of them were accepted.
  std::size_t abort_after = 10000;
  double max_rejection = 0.999;
};

/// Rejection-samples uniform graphs. Record i draws from its own seed stream,
/// so the output only depends on the options.
Dataset generate_dataset(const GenerateOptions& opts);

void write_dataset(std::ostream& out, const Dataset& d);
/// Never returns a partial dataset: any short read throws DatasetReadError.
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset load_dataset(const std::filesystem::path& path);

/// Largest |label - recomputed label| over `checks` records picked by `seed`.
/// Labels are recomputed from the stored float weights and rounded to float.
double spot_check(const Dataset& d, std::size_t checks, std::uint64_t seed);

TrainingData to_training_data(const Dataset& d);

}  // namespace qgd
