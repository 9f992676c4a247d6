#include "qgd/dreaming.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "qgd/adam.hpp"
#include "qgd/rng.hpp"

namespace qgd {

namespace {

constexpr double kMonotoneSlack = 1e-9;

std::optional<double> true_value_or_missing(const QuantumGraph& g, Property prop) {
  try {
    return property_value(g, prop);
  } catch (const DegenerateState&) {
    return std::nullopt;
  }
}

// Shared ascent loop. `gradient` fills the ascent direction for the current
// graph and returns the objective value there.
template <typename Gradient, typename Recorder>
DreamTrajectory ascend(const QuantumGraph& start, const DreamConfig& cfg, Gradient gradient, Recorder record) {
  cfg.validate();
  DreamTrajectory traj;
  QuantumGraph g = start;
  Adam adam;
  std::array<double, kNumEdges> grad{};
  for (int step = 0;; ++step) {
    const double value = gradient(g, grad);
    const bool stride_hit = step % cfg.snapshot_stride == 0;
    if (stride_hit || step == cfg.steps) traj.snapshots.push_back(record(step, g, value));
    if (step == cfg.steps) break;

    if (cfg.rule == AscentRule::Plain) {
      for (int e = 0; e < kNumEdges; ++e) g[e] += cfg.lr * grad[e];
    } else {
      std::array<double, kNumEdges> descent{};
      for (int e = 0; e < kNumEdges; ++e) descent[e] = -grad[e];
      adam.step(std::span<double>(g.weights), std::span<const double>(descent), cfg.lr);
    }
    if (cfg.clamp) {
      for (auto& w : g.weights) w = std::clamp(w, -1.0, 1.0);
    }
    ++traj.steps_taken;
  }
  return traj;
}

}  // namespace

void DreamConfig::validate() const {
  if (steps < 1) throw std::invalid_argument(fmt::format("dream steps must be >= 1, got {}", steps));
  if (!(lr > 0.0)) throw std::invalid_argument(fmt::format("dream lr must be positive, got {}", lr));
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
}

DreamTrajectory dream(const Mlp& m, const QuantumGraph& start, Property prop, const DreamConfig& cfg) {
  if (m.input_size() != kNumEdges) {
    throw ShapeError(fmt::format("dreaming needs a {}-input network, got {}", kNumEdges, m.input_size()));
  }
  auto gradient = [&m](const QuantumGraph& g, std::array<double, kNumEdges>& grad) {
    const Eigen::VectorXd d = input_gradient(m, g.weights);
    for (int e = 0; e < kNumEdges; ++e) grad[e] = d(e);
    return 0.0;
  };
  auto record = [&m, prop](int step, const QuantumGraph& g, double) {
    return DreamSnapshot{step, g, predict(m, g.weights), true_value_or_missing(g, prop)};
  };
  return ascend(start, cfg, gradient, record);
}

DreamTrajectory dream_oracle(const QuantumGraph& start, Property prop, const DreamConfig& cfg) {
  std::optional<double> previous;
  int violations = 0;
  int current_step = 0;
  auto gradient = [&](const QuantumGraph& g, std::array<double, kNumEdges>& grad) {
    double value = 0.0;
    try {
      value = property_value(g, prop);
      grad = property_gradient(g, prop);
    } catch (const DegenerateState& e) {
      throw DegenerateState(fmt::format("oracle dream collapsed at step {}: {}", current_step, e.what()));
    }
    if (previous && value < *previous - kMonotoneSlack) ++violations;
    previous = value;
    ++current_step;
    return value;
  };
  auto record = [](int step, const QuantumGraph& g, double value) {
    return DreamSnapshot{step, g, value, value};
  };
  DreamTrajectory traj = ascend(start, cfg, gradient, record);
  traj.monotonicity_violations = violations;
  return traj;
}

std::uint64_t run_seed(std::uint64_t seed, int index) {
  return derive_seed(seed, static_cast<std::uint64_t>(index));
}

DreamEnsembleResult dream_ensemble(const Mlp& m, Property prop, int n_runs, const DreamConfig& cfg, double cap) {
  if (n_runs < 1) throw std::invalid_argument(fmt::format("ensemble needs at least one run, got {}", n_runs));
  cfg.validate();
  DreamConfig run_cfg = cfg;
  run_cfg.snapshot_stride = cfg.steps;  // only initial and final are kept

  DreamEnsembleResult result;
  result.property = prop;
  result.cap = cap;
  for (int r = 0; r < n_runs; ++r) {
    DreamRun run;
    run.run = r;
    run.seed = run_seed(cfg.seed, r);
    run.initial_graph = random_graph(run.seed);
    try {
      run_cfg.seed = run.seed;
      const DreamTrajectory t = dream(m, run.initial_graph, prop, run_cfg);
      run.final_graph = t.final().graph;
      run.initial_predicted = t.initial().predicted;
      run.final_predicted = t.final().predicted;
      run.initial_true = t.initial().true_value;
      run.final_true = t.final().true_value;
      if (!run.initial_true || !run.final_true) run.error = "degenerate state";
    } catch (const std::exception& e) {
      run.error = e.what();
    }
    result.runs.push_back(std::move(run));
  }

  int above_initial = 0;
  int above_final = 0;
  for (const auto& run : result.runs) {
    if (!run.initial_true || !run.final_true) continue;
    const double a = *run.initial_true;
    const double b = *run.final_true;
    result.mean_initial += a;
    result.mean_final += b;
    result.max_initial = result.valid_runs == 0 ? a : std::max(result.max_initial, a);
    result.max_final = result.valid_runs == 0 ? b : std::max(result.max_final, b);
    above_initial += a > cap;
    above_final += b > cap;
    ++result.valid_runs;
  }
  if (result.valid_runs > 0) {
    const double n = result.valid_runs;
    result.mean_initial /= n;
    result.mean_final /= n;
    result.fraction_initial_above_cap = above_initial / n;
    result.fraction_final_above_cap = above_final / n;
  }
  return result;
}

std::vector<NeuronDream> dream_neuron(const Mlp& m, NeuronSelector sel, int k_inits, const DreamConfig& cfg) {
  if (k_inits < 1) throw std::invalid_argument(fmt::format("k_inits must be >= 1, got {}", k_inits));
  const Mlp sub = truncate_at_neuron(m, sel);
  DreamConfig run_cfg = cfg;
  run_cfg.snapshot_stride = cfg.steps;
  std::vector<NeuronDream> out;
  out.reserve(static_cast<std::size_t>(k_inits));
  for (int k = 0; k < k_inits; ++k) {
    NeuronDream d;
    d.seed = run_seed(cfg.seed, k);
    run_cfg.seed = d.seed;
    const DreamTrajectory t = dream(sub, random_graph(d.seed), Property::GHZFidelity, run_cfg);
    d.final_graph = t.final().graph;
    d.initial_activation = t.initial().predicted;
    d.final_activation = t.final().predicted;
    d.pm = pm_probability_array(d.final_graph);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace qgd
