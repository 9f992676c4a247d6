#pragma once

#include <string>

#include "qgd/graph_core.hpp"

namespace qgd {

/// Graphviz rendering of a quantum graph. Edges with |w| <= threshold are
/// dropped; opacity and pen width scale with |w|; negative edges carry a
/// diamond arrowhead; the two endpoint modes colour the two halves of each edge.
std::string export_dot(const QuantumGraph& g, double threshold);

}  // namespace qgd
