#include "qgd/tables.hpp"

#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace qgd {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string weight_header() {
  std::string s;
  for (int e = 0; e < kNumEdges; ++e) s += fmt::format(",w{}", e);
  return s;
}

std::string weight_cells(const QuantumGraph& g) {
  std::string s;
  for (double w : g.weights) s += "," + num(w);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_cell(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') throw TableError(fmt::format("bad number '{}'", cell));
  return v;
}

}  // namespace

void write_history_csv(std::ostream& out, const TrainHistory& h) {
  out << "epoch,train_mse,test_mse,learning_rate\n";
  for (int i = 0; i < h.epochs_run; ++i) {
    out << i << ',' << num(h.train_mse[i]) << ',' << num(h.test_mse[i]) << ',' << num(h.learning_rate[i]) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const DreamTrajectory& t) {
  out << "step" << weight_header() << ",predicted,true\n";
  for (const auto& s : t.snapshots) {
    out << s.step << weight_cells(s.graph) << ',' << num(s.predicted) << ',' << opt_num(s.true_value) << '\n';
  }
}

void write_ensemble_csv(std::ostream& out, const DreamEnsembleResult& e) {
  out << "run,initial_true,final_true\n";
  for (const auto& r : e.runs) {
    out << r.run << ',' << opt_num(r.initial_true) << ',' << opt_num(r.final_true) << '\n';
  }
}

void write_neuron_dreams_csv(std::ostream& out, const std::vector<NeuronDream>& dreams) {
  out << "init,seed,initial_activation,final_activation" << weight_header();
  for (int d = 0; d < kNumDirections; ++d)
    for (int k = 0; k < kNumKets; ++k) out << ",p" << "HVD"[d] << '_' << ket_label(k);
  out << '\n';
  for (std::size_t i = 0; i < dreams.size(); ++i) {
    const auto& dr = dreams[i];
    out << i << ',' << dr.seed << ',' << num(dr.initial_activation) << ',' << num(dr.final_activation)
        << weight_cells(dr.final_graph);
    for (const auto& row : dr.pm.probs)
      for (double p : row) out << ',' << num(p);
    out << '\n';
  }
}

void write_entropy_csv(std::ostream& out, const EntropyProfile& p) {
  out << "layer,neuron,H\n";
  for (const auto& n : p.per_neuron) out << n.layer << ',' << n.neuron << ',' << opt_num(n.entropy) << '\n';
}

void write_entropy_summary_csv(std::ostream& out, const EntropyProfile& p) {
  out << "layer,mean_H,counted,excluded\n";
  for (const auto& l : p.per_layer) {
    out << l.layer << ',' << (l.undefined ? std::string() : num(l.mean)) << ',' << l.counted << ',' << l.excluded
        << '\n';
  }
}

void write_activations_csv(std::ostream& out, const WeightedActivationMap& map) {
  out << "layer,from_index,to_index,value\n";
  for (const auto& e : map.kept_entries()) out << e.layer << ',' << e.from << ',' << e.to << ',' << num(e.value) << '\n';
}

void write_shift_csv(std::ostream& out, const ShiftReport& r) {
  out << "bin,lo,hi,initial_count,final_count\n";
  for (int b = 0; b < kShiftBins; ++b) {
    out << b << ',' << num(static_cast<double>(b) / kShiftBins) << ',' << num(static_cast<double>(b + 1) / kShiftBins)
        << ',' << r.initial_histogram[b] << ',' << r.final_histogram[b] << '\n';
  }
}

void write_shift_summary(std::ostream& out, const ShiftReport& r) {
  out << "runs=" << r.runs << '\n'
      << "cap=" << num(r.cap) << '\n'
      << "mean_initial=" << num(r.mean_initial) << '\n'
      << "mean_final=" << num(r.mean_final) << '\n'
      << "mean_shift=" << num(r.mean_shift) << '\n'
      << "max_initial=" << num(r.max_initial) << '\n'
      << "max_final=" << num(r.max_final) << '\n'
      << "fraction_initial_above_cap=" << num(r.fraction_initial_above_cap) << '\n'
      << "fraction_final_above_cap=" << num(r.fraction_above_cap) << '\n';
}

std::vector<ShiftSample> read_ensemble_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("run,initial_true,final_true", 0) != 0) {
    throw TableError("not an ensemble table (expected header run,initial_true,final_true)");
  }
  std::vector<ShiftSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 3) throw TableError(fmt::format("short ensemble row '{}'", line));
    const auto a = parse_cell(cells[1]);
    const auto b = parse_cell(cells[2]);
    if (a && b) samples.push_back({*a, *b});
  }
  return samples;
}

QuantumGraph read_graph(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  QuantumGraph g;
  if (text.rfind("step,", 0) == 0) {
    std::istringstream lines(text);
    std::string line;
    std::string last;
    std::getline(lines, line);
    while (std::getline(lines, line))
      if (!line.empty()) last = line;
    const auto cells = split_csv(last);
    if (cells.size() < 1 + kNumEdges) throw TableError("trajectory table has no complete snapshot row");
    for (int e = 0; e < kNumEdges; ++e) {
      const auto v = parse_cell(cells[static_cast<std::size_t>(1 + e)]);
      if (!v) throw TableError(fmt::format("missing weight w{}", e));
      g[e] = *v;
    }
    return g;
  }
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream values(cleaned);
  std::string token;
  int count = 0;
  while (values >> token) {
    if (count == kNumEdges) throw TableError("graph file has more than 24 weights");
    g[count++] = *parse_cell(token);
  }
  if (count != kNumEdges) throw TableError(fmt::format("graph file has {} weights, expected 24", count));
  return g;
}

QuantumGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TableError(fmt::format("cannot open '{}'", path.string()));
  return read_graph(in);
}

}  // namespace qgd
