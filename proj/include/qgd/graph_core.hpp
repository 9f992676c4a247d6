#pragma once

// Edge-weighted, two-mode complete graphs on four vertices and the 4-qubit
// states they generate through perfect matchings.
//
// Canonical edge order: index = 4 * pair_rank + 2 * mode_lo + mode_hi, where
// pair_rank enumerates (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) and mode_lo/mode_hi
// are the modes carried by the lower/higher vertex of the pair. See
// docs/formats.md for the full table.
//
// Kets are indexed by m0 m1 m2 m3 read as a 4-bit integer, m0 most significant.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qgd/rng.hpp"

namespace qgd {

inline constexpr int kNumVertices = 4;
inline constexpr int kNumPairs = 6;
inline constexpr int kNumEdges = 24;
inline constexpr int kNumKets = 16;
inline constexpr int kNumDirections = 3;
inline constexpr int kNumBipartitions = 7;
inline constexpr double kDegenerateNorm = 1e-12;

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a graph produces (numerically) no state at all.
struct DegenerateState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct VertexPair {
  int lo = 0;
  int hi = 1;
  friend bool operator==(const VertexPair&, const VertexPair&) = default;
};

struct EdgeKey {
  VertexPair pair;
  int mode_lo = 0;
  int mode_hi = 0;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

int pair_rank(VertexPair pair);
VertexPair pair_from_rank(int rank);

/// Flat index in [0, 24). Throws DomainError for invalid vertices/modes.
int canonical_edge_index(VertexPair pair, int mode_lo, int mode_hi);
int canonical_edge_index(const EdgeKey& key);
EdgeKey edge_key(int index);

/// Index of the edge between vertices a and b with vertex a in mode ma and b
/// in mode mb; the vertices may be given in either order.
int edge_index_between(int a, int ma, int b, int mb);

struct QuantumGraph {
  std::array<double, kNumEdges> weights{};

  double& operator[](int i) { return weights[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return weights[static_cast<std::size_t>(i)]; }
  double& at(const EdgeKey& key) { return (*this)[canonical_edge_index(key)]; }
  double at(const EdgeKey& key) const { return (*this)[canonical_edge_index(key)]; }

  friend bool operator==(const QuantumGraph&, const QuantumGraph&) = default;
};

/// 24 i.i.d. uniform weights in [-1, 1].
QuantumGraph random_graph(std::uint64_t seed);
QuantumGraph random_graph(Engine& rng);

/// w01(0,0) = w23(0,0) = w02(1,1) = w13(1,1) = 1: produces |0000> + |1111>.
QuantumGraph ghz_fixture_graph();

struct StateVector {
  std::array<double, kNumKets> amplitudes{};

  double operator[](int k) const { return amplitudes[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return amplitudes[static_cast<std::size_t>(k)]; }
  double norm() const;
};

int ket_index(int m0, int m1, int m2, int m3);
/// Mode of party `vertex` in ket `ket`.
int ket_mode(int ket, int vertex);
std::string ket_label(int ket);

/// Unnormalized state: amplitude of each ket is the sum over the three
/// perfect-matching directions of the product of the two mode-consistent
/// edge weights.
StateVector build_state(const QuantumGraph& g);

/// Throws DegenerateState when the norm is <= kDegenerateNorm.
StateVector normalize_state(const StateVector& s);

enum class TargetTag { GHZ, W };

struct TargetState {
  TargetTag tag;
  StateVector state;
};

TargetState ghz_target();
TargetState w_target();

double fidelity(const QuantumGraph& g, const TargetState& t);
double fidelity(const StateVector& normalized, const TargetState& t);

/// A bipartition is stored as a 4-bit mask of the listed side. The 7 canonical
/// ones are the four single parties and the three pairs containing party 0.
struct Bipartition {
  std::uint8_t mask = 1;
  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

const std::array<Bipartition, kNumBipartitions>& canonical_bipartitions();
std::string bipartition_label(Bipartition m);

/// tr(rho_M^2) for the reduction of a unit-norm pure state onto M.
double reduced_purity(const StateVector& s, Bipartition m);

struct PurityReport {
  std::array<double, kNumBipartitions> per_bipartition{};
  double mean = 0.0;
};

PurityReport purity_report(const StateVector& s);
double mean_purity(const StateVector& s);
/// Sum over the 7 bipartitions of sqrt(2 (1 - tr(rho_M^2))).
double concurrence(const StateVector& s);

enum class Direction { H = 0, V = 1, D = 2 };

/// The two vertex pairs forming each matching direction: H = (01)(23),
/// V = (03)(12), D = (02)(13).
std::array<VertexPair, 2> direction_pairs(Direction d);

struct PMProbabilityArray {
  std::array<std::array<double, kNumKets>, kNumDirections> probs{};

  double operator()(Direction d, int ket) const {
    return probs[static_cast<std::size_t>(d)][static_cast<std::size_t>(ket)];
  }
  double& operator()(Direction d, int ket) {
    return probs[static_cast<std::size_t>(d)][static_cast<std::size_t>(ket)];
  }
};

PMProbabilityArray pm_probability_array(const QuantumGraph& g);

enum class Property : std::uint8_t { GHZFidelity = 0, WFidelity = 1, MeanPurity = 2 };

std::string_view property_name(Property p);
/// Accepts "ghz", "w", "purity" (and the enum spellings).
Property parse_property(std::string_view name);

double property_value(const QuantumGraph& g, Property prop);

/// Exact analytic gradient of property_value with respect to the 24 weights.
std::array<double, kNumEdges> property_gradient(const QuantumGraph& g, Property prop);

}  // namespace qgd
