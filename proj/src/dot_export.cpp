#include "qgd/dot_export.hpp"

#include <cmath>

#include <fmt/format.h>

namespace qgd {

namespace {

constexpr const char* kModeColour[2] = {"1f77b4", "d62728"};  // mode 0 blue, mode 1 red

}  // namespace

std::string export_dot(const QuantumGraph& g, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw DomainError(fmt::format("threshold {} outside [0,1]", threshold));
  }
  std::string out = "graph quantum_graph {\n";
  out += "  layout=circo;\n";
  out += "  node [shape=circle, fontname=\"Helvetica\"];\n";
  for (int v = 0; v < kNumVertices; ++v) out += fmt::format("  {};\n", v);
  for (int e = 0; e < kNumEdges; ++e) {
    const double w = g[e];
    const double mag = std::abs(w);
    if (!(mag > threshold)) continue;
    const EdgeKey key = edge_key(e);
    const int alpha = static_cast<int>(std::lround(std::min(mag, 1.0) * 255.0));
    out += fmt::format(
        "  {} -- {} [color=\"#{}{:02x};0.5:#{}{:02x}\", penwidth={:.3f}, label=\"{:+.3f}\", "
        "tooltip=\"edge {} modes {}{}\"",
        key.pair.lo, key.pair.hi, kModeColour[key.mode_lo], alpha, kModeColour[key.mode_hi], alpha,
        1.0 + 4.0 * std::min(mag, 1.0), w, e, key.mode_lo, key.mode_hi);
    if (w < 0.0) out += ", dir=forward, arrowhead=diamond";
    out += "];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace qgd
