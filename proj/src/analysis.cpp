#include "qgd/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qgd {

double normalized_entropy(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("entropy weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw UndefinedEntropy("entropy of an all-zero array is undefined");
  double h = 0.0;
  for (double w : weights) {
    if (w == 0.0) continue;
    const double p = w / total;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

PMProbabilityArray mean_pm_array(std::span<const PMProbabilityArray> arrays) {
  if (arrays.empty()) throw std::invalid_argument("need at least one PM array");
  PMProbabilityArray mean;
  for (const auto& a : arrays)
    for (int d = 0; d < kNumDirections; ++d)
      for (int k = 0; k < kNumKets; ++k) mean.probs[d][k] += a.probs[d][k];
  const auto n = static_cast<double>(arrays.size());
  for (auto& row : mean.probs)
    for (auto& v : row) v /= n;
  return mean;
}

double neuron_entropy(std::span<const PMProbabilityArray> arrays) {
  const PMProbabilityArray mean = mean_pm_array(arrays);
  std::array<double, kNumDirections * kNumKets> flat{};
  for (int d = 0; d < kNumDirections; ++d)
    for (int k = 0; k < kNumKets; ++k) flat[d * kNumKets + k] = mean.probs[d][k];
  return normalized_entropy(flat);
}

EntropyProfile entropy_profile(const Mlp& m, int k_inits, const DreamConfig& cfg) {
  EntropyProfile profile;
  const int hidden_layers = m.num_layers() - 1;
  for (int layer = 1; layer <= hidden_layers; ++layer) {
    LayerEntropy summary;
    summary.layer = layer;
    double sum = 0.0;
    for (int neuron = 0; neuron < m.layer_sizes[layer]; ++neuron) {
      DreamConfig neuron_cfg = cfg;
      // Each neuron gets its own family of starting graphs.
      neuron_cfg.seed = run_seed(cfg.seed, layer * 100000 + neuron);
      const auto dreams = dream_neuron(m, {layer, neuron}, k_inits, neuron_cfg);
      std::vector<PMProbabilityArray> arrays;
      NeuronEntropy ne{layer, neuron, std::nullopt, 0.0};
      for (const auto& d : dreams) {
        arrays.push_back(d.pm);
        ne.mean_activation_gain += (d.final_activation - d.initial_activation) / static_cast<double>(dreams.size());
      }
      try {
        ne.entropy = neuron_entropy(arrays);
        sum += *ne.entropy;
        ++summary.counted;
      } catch (const UndefinedEntropy&) {
        ++summary.excluded;
      }
      profile.per_neuron.push_back(ne);
    }
    summary.undefined = summary.counted == 0;
    summary.mean = summary.counted > 0 ? sum / summary.counted : 0.0;
    profile.per_layer.push_back(summary);
  }
  return profile;
}

std::vector<WeightedActivationEntry> WeightedActivationMap::kept_entries() const {
  std::vector<WeightedActivationEntry> out;
  for (std::size_t l = 0; l < values.size(); ++l) {
    const auto& v = values[l];
    for (Eigen::Index from = 0; from < v.cols(); ++from)
      for (Eigen::Index to = 0; to < v.rows(); ++to)
        if (mask[l](to, from)) {
          out.push_back({static_cast<int>(l), static_cast<int>(from), static_cast<int>(to), v(to, from)});
        }
  }
  return out;
}

WeightedActivationMap weighted_activations(const Mlp& m, std::span<const double> x, double threshold) {
  const ForwardTrace t = forward(m, x);
  WeightedActivationMap map;
  map.threshold = threshold;
  for (int l = 0; l < m.num_layers(); ++l) {
    const Eigen::MatrixXd& w = m.layers[l].weights;
    const Eigen::VectorXd& a = t.activations[l];
    Eigen::MatrixXd v = (w.array().rowwise() * a.transpose().array()).abs().matrix();
    map.global_max = std::max(map.global_max, v.size() ? v.maxCoeff() : 0.0);
    map.total_mass += v.sum();
    map.values.push_back(std::move(v));
  }
  for (auto& v : map.values) {
    if (map.global_max > 0.0) v /= map.global_max;
    map.mask.push_back((v.array() >= threshold) && (v.array() > 0.0));
  }
  return map;
}

int shift_bin(double value) {
  const int b = static_cast<int>(std::floor(value * kShiftBins));
  return std::clamp(b, 0, kShiftBins - 1);
}

ShiftReport shift_report(std::span<const ShiftSample> samples, double cap) {
  if (samples.empty()) throw std::invalid_argument("shift report needs at least one run");
  ShiftReport r;
  r.cap = cap;
  r.runs = static_cast<int>(samples.size());
  r.max_initial = samples.front().initial;
  r.max_final = samples.front().final;
  int above_initial = 0;
  int above_final = 0;
  for (const auto& s : samples) {
    ++r.initial_histogram[shift_bin(s.initial)];
    ++r.final_histogram[shift_bin(s.final)];
    r.mean_initial += s.initial;
    r.mean_final += s.final;
    r.max_initial = std::max(r.max_initial, s.initial);
    r.max_final = std::max(r.max_final, s.final);
    above_initial += s.initial > cap;
    above_final += s.final > cap;
  }
  const double n = r.runs;
  r.mean_initial /= n;
  r.mean_final /= n;
  r.mean_shift = r.mean_final - r.mean_initial;
  r.fraction_initial_above_cap = above_initial / n;
  r.fraction_above_cap = above_final / n;
  return r;
}

ShiftReport shift_report(const DreamEnsembleResult& e, double cap) {
  std::vector<ShiftSample> samples;
  for (const auto& run : e.runs) {
    if (run.initial_true && run.final_true) samples.push_back({*run.initial_true, *run.final_true});
  }
  if (samples.empty()) throw std::invalid_argument("ensemble has no run with both true values");
  return shift_report(samples, cap);
}

}  // namespace qgd
