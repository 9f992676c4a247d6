#include "qgd/graph_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "qgd/rng.hpp"

namespace qgd {

namespace {

constexpr std::array<VertexPair, kNumPairs> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

void check_vertex(int v) {
  if (v < 0 || v >= kNumVertices) throw DomainError(fmt::format("vertex {} outside [0,4)", v));
}

void check_mode(int m) {
  if (m != 0 && m != 1) throw DomainError(fmt::format("mode {} is not 0 or 1", m));
}

struct MatchingEdges {
  int first;
  int second;
};

// For every (direction, ket): the two edges whose product feeds that ket.
using MatchingTable = std::array<std::array<MatchingEdges, kNumKets>, kNumDirections>;

MatchingTable make_matching_table() {
  MatchingTable table{};
  for (int d = 0; d < kNumDirections; ++d) {
    const auto pairs = direction_pairs(static_cast<Direction>(d));
    for (int ket = 0; ket < kNumKets; ++ket) {
      auto edge_for = [ket](VertexPair p) {
        return canonical_edge_index(p, ket_mode(ket, p.lo), ket_mode(ket, p.hi));
      };
      table[d][ket] = {edge_for(pairs[0]), edge_for(pairs[1])};
    }
  }
  return table;
}

const MatchingTable& matching_table() {
  static const MatchingTable table = make_matching_table();
  return table;
}

double dot(const StateVector& a, const StateVector& b) {
  double s = 0.0;
  for (int k = 0; k < kNumKets; ++k) s += a[k] * b[k];
  return s;
}

// Row/column coordinates of each ket when the amplitude vector is reshaped
// into a 2^|M| x 2^(4-|M|) matrix along bipartition M.
struct Reshape {
  int rows = 0;
  int cols = 0;
  std::array<int, kNumKets> row{};
  std::array<int, kNumKets> col{};
};

Reshape reshape_for(Bipartition m) {
  Reshape r;
  int n_in = std::popcount(static_cast<unsigned>(m.mask));
  r.rows = 1 << n_in;
  r.cols = 1 << (kNumVertices - n_in);
  for (int ket = 0; ket < kNumKets; ++ket) {
    int ri = 0;
    int ci = 0;
    for (int v = 0; v < kNumVertices; ++v) {
      int bit = ket_mode(ket, v);
      if (m.mask & (1u << v)) {
        ri = (ri << 1) | bit;
      } else {
        ci = (ci << 1) | bit;
      }
    }
    r.row[ket] = ri;
    r.col[ket] = ci;
  }
  return r;
}

using Gram = std::array<std::array<double, 8>, 8>;

// G = A A^T for the reshaped amplitude matrix A; returns ||G||_F^2, which is
// the sum of the fourth powers of the Schmidt coefficients.
double gram_purity(const StateVector& s, const Reshape& r, Gram* gram_out) {
  Gram gram{};
  for (int k = 0; k < kNumKets; ++k) {
    for (int l = 0; l < kNumKets; ++l) {
      if (r.col[k] != r.col[l]) continue;
      gram[r.row[k]][r.row[l]] += s[k] * s[l];
    }
  }
  double q = 0.0;
  for (int i = 0; i < r.rows; ++i)
    for (int j = 0; j < r.rows; ++j) q += gram[i][j] * gram[i][j];
  if (gram_out) *gram_out = gram;
  return q;
}

// Gradient of ||A A^T||_F^2 with respect to the amplitudes: 4 (A A^T) A.
StateVector gram_purity_gradient(const StateVector& s, const Reshape& r, const Gram& gram) {
  StateVector g;
  for (int k = 0; k < kNumKets; ++k) {
    double acc = 0.0;
    for (int l = 0; l < kNumKets; ++l) {
      if (r.col[l] != r.col[k]) continue;
      acc += gram[r.row[k]][r.row[l]] * s[l];
    }
    g[k] = 4.0 * acc;
  }
  return g;
}

void check_unit_norm(const StateVector& s) {
  double n = s.norm();
  if (std::abs(n - 1.0) > 1e-9) {
    throw ContractViolation(fmt::format("state must be unit norm, got norm {:.17g}", n));
  }
}

// d(property)/d(amplitude) for the unnormalized amplitude vector `a`.
StateVector amplitude_gradient(const StateVector& a, Property prop) {
  const double n = dot(a, a);
  if (std::sqrt(n) <= kDegenerateNorm) throw DegenerateState("graph generates no state");
  StateVector g;
  switch (prop) {
    case Property::GHZFidelity:
    case Property::WFidelity: {
      const TargetState target = prop == Property::GHZFidelity ? ghz_target() : w_target();
      const StateVector& psi = target.state;
      const double s = dot(psi, a);
      for (int k = 0; k < kNumKets; ++k) g[k] = 2.0 * s * psi[k] / n - 2.0 * s * s * a[k] / (n * n);
      break;
    }
    case Property::MeanPurity: {
      for (const auto& m : canonical_bipartitions()) {
        Reshape r = reshape_for(m);
        Gram gram;
        double q = gram_purity(a, r, &gram);
        StateVector dq = gram_purity_gradient(a, r, gram);
        for (int k = 0; k < kNumKets; ++k) {
          g[k] += (dq[k] / (n * n) - 4.0 * q * a[k] / (n * n * n)) / kNumBipartitions;
        }
      }
      break;
    }
  }
  return g;
}

}  // namespace

int pair_rank(VertexPair pair) {
  check_vertex(pair.lo);
  check_vertex(pair.hi);
  if (pair.lo > pair.hi) std::swap(pair.lo, pair.hi);
  if (pair.lo == pair.hi) throw DomainError(fmt::format("self-pair ({},{})", pair.lo, pair.hi));
  for (int r = 0; r < kNumPairs; ++r) {
    if (kPairs[r] == pair) return r;
  }
  throw DomainError("unreachable vertex pair");
}

VertexPair pair_from_rank(int rank) {
  if (rank < 0 || rank >= kNumPairs) throw DomainError(fmt::format("pair rank {} outside [0,6)", rank));
  return kPairs[rank];
}

int canonical_edge_index(VertexPair pair, int mode_lo, int mode_hi) {
  check_vertex(pair.lo);
  check_vertex(pair.hi);
  if (pair.lo >= pair.hi) {
    throw DomainError(fmt::format("pair ({},{}) must be listed lower vertex first", pair.lo, pair.hi));
  }
  check_mode(mode_lo);
  check_mode(mode_hi);
  return 4 * pair_rank(pair) + 2 * mode_lo + mode_hi;
}

int canonical_edge_index(const EdgeKey& key) {
  return canonical_edge_index(key.pair, key.mode_lo, key.mode_hi);
}

EdgeKey edge_key(int index) {
  if (index < 0 || index >= kNumEdges) throw DomainError(fmt::format("edge index {} outside [0,24)", index));
  return {pair_from_rank(index / 4), (index / 2) % 2, index % 2};
}

int edge_index_between(int a, int ma, int b, int mb) {
  if (a < b) return canonical_edge_index({a, b}, ma, mb);
  return canonical_edge_index({b, a}, mb, ma);
}

QuantumGraph random_graph(std::uint64_t seed) {
  Engine rng = make_engine(seed);
  return random_graph(rng);
}

QuantumGraph random_graph(Engine& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  QuantumGraph g;
  for (auto& w : g.weights) w = dist(rng);
  return g;
}

QuantumGraph ghz_fixture_graph() {
  QuantumGraph g;
  g.at({{0, 1}, 0, 0}) = 1.0;
  g.at({{2, 3}, 0, 0}) = 1.0;
  g.at({{0, 2}, 1, 1}) = 1.0;
  g.at({{1, 3}, 1, 1}) = 1.0;
  return g;
}

double StateVector::norm() const { return std::sqrt(dot(*this, *this)); }

int ket_index(int m0, int m1, int m2, int m3) {
  for (int m : {m0, m1, m2, m3}) check_mode(m);
  return (m0 << 3) | (m1 << 2) | (m2 << 1) | m3;
}

int ket_mode(int ket, int vertex) { return (ket >> (kNumVertices - 1 - vertex)) & 1; }

std::string ket_label(int ket) {
  std::string s(4, '0');
  for (int v = 0; v < kNumVertices; ++v) s[v] = static_cast<char>('0' + ket_mode(ket, v));
  return s;
}

std::array<VertexPair, 2> direction_pairs(Direction d) {
  switch (d) {
    case Direction::H: return {{{0, 1}, {2, 3}}};
    case Direction::V: return {{{0, 3}, {1, 2}}};
    case Direction::D: return {{{0, 2}, {1, 3}}};
  }
  throw DomainError("unknown direction");
}

StateVector build_state(const QuantumGraph& g) {
  const auto& table = matching_table();
  StateVector s;
  for (int ket = 0; ket < kNumKets; ++ket) {
    double amp = 0.0;
    for (int d = 0; d < kNumDirections; ++d) {
      const auto& e = table[d][ket];
      amp += g[e.first] * g[e.second];
    }
    s[ket] = amp;
  }
  return s;
}

StateVector normalize_state(const StateVector& s) {
  const double n = s.norm();
  if (!(n > kDegenerateNorm)) {
    throw DegenerateState(fmt::format("state norm {:.3g} at or below {:.0e}", n, kDegenerateNorm));
  }
  StateVector out;
  for (int k = 0; k < kNumKets; ++k) out[k] = s[k] / n;
  return out;
}

TargetState ghz_target() {
  TargetState t{TargetTag::GHZ, {}};
  t.state[0b0000] = 1.0 / std::sqrt(2.0);
  t.state[0b1111] = 1.0 / std::sqrt(2.0);
  return t;
}

TargetState w_target() {
  TargetState t{TargetTag::W, {}};
  for (int ket : {0b1000, 0b0100, 0b0010, 0b0001}) t.state[ket] = 0.5;
  return t;
}

double fidelity(const StateVector& normalized, const TargetState& t) {
  const double overlap = dot(normalized, t.state);
  return overlap * overlap;
}

double fidelity(const QuantumGraph& g, const TargetState& t) {
  return fidelity(normalize_state(build_state(g)), t);
}

const std::array<Bipartition, kNumBipartitions>& canonical_bipartitions() {
  // Masks use bit v for party v.
  static const std::array<Bipartition, kNumBipartitions> parts{
      {{0b0001}, {0b0010}, {0b0100}, {0b1000}, {0b0011}, {0b0101}, {0b1001}}};
  return parts;
}

std::string bipartition_label(Bipartition m) {
  std::string in;
  std::string out;
  for (int v = 0; v < kNumVertices; ++v) ((m.mask >> v) & 1 ? in : out) += static_cast<char>('0' + v);
  return in + "|" + out;
}

double reduced_purity(const StateVector& s, Bipartition m) {
  if (m.mask == 0 || m.mask >= 0b1111) {
    throw DomainError(fmt::format("bipartition mask {} is not a nonempty proper subset", m.mask));
  }
  check_unit_norm(s);
  return gram_purity(s, reshape_for(m), nullptr);
}

PurityReport purity_report(const StateVector& s) {
  PurityReport report;
  const auto& parts = canonical_bipartitions();
  for (int i = 0; i < kNumBipartitions; ++i) report.per_bipartition[i] = reduced_purity(s, parts[i]);
  report.mean = std::accumulate(report.per_bipartition.begin(), report.per_bipartition.end(), 0.0) /
                kNumBipartitions;
  return report;
}

double mean_purity(const StateVector& s) { return purity_report(s).mean; }

double concurrence(const StateVector& s) {
  double c = 0.0;
  for (double p : purity_report(s).per_bipartition) c += std::sqrt(std::max(0.0, 2.0 * (1.0 - p)));
  return c;
}

PMProbabilityArray pm_probability_array(const QuantumGraph& g) {
  const auto& table = matching_table();
  PMProbabilityArray out;
  for (int d = 0; d < kNumDirections; ++d) {
    for (int ket = 0; ket < kNumKets; ++ket) {
      const auto& e = table[d][ket];
      const double w = g[e.first] * g[e.second];
      out.probs[d][ket] = w * w;
    }
  }
  return out;
}

std::string_view property_name(Property p) {
  switch (p) {
    case Property::GHZFidelity: return "ghz";
    case Property::WFidelity: return "w";
    case Property::MeanPurity: return "purity";
  }
  return "unknown";
}

Property parse_property(std::string_view name) {
  if (name == "ghz" || name == "GHZFidelity") return Property::GHZFidelity;
  if (name == "w" || name == "WFidelity") return Property::WFidelity;
  if (name == "purity" || name == "MeanPurity") return Property::MeanPurity;
  throw DomainError(fmt::format("unknown property '{}' (expected ghz, w or purity)", name));
}

double property_value(const QuantumGraph& g, Property prop) {
  const StateVector s = normalize_state(build_state(g));
  switch (prop) {
    case Property::GHZFidelity: return fidelity(s, ghz_target());
    case Property::WFidelity: return fidelity(s, w_target());
    case Property::MeanPurity: return mean_purity(s);
  }
  throw DomainError("unknown property");
}

std::array<double, kNumEdges> property_gradient(const QuantumGraph& g, Property prop) {
  const StateVector a = build_state(g);
  const StateVector da = amplitude_gradient(a, prop);
  const auto& table = matching_table();
  std::array<double, kNumEdges> grad{};
  for (int d = 0; d < kNumDirections; ++d) {
    for (int ket = 0; ket < kNumKets; ++ket) {
      const auto& e = table[d][ket];
      grad[e.first] += da[ket] * g[e.second];
      grad[e.second] += da[ket] * g[e.first];
    }
  }
  return grad;
}

}  // namespace qgd
