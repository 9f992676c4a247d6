// Acceptance gate: runs every acceptance criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion, followed by the measured values.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles/quantum_oracles.hpp"
#include "qgd/analysis.hpp"
#include "qgd/dataset.hpp"
#include "qgd/dreaming.hpp"
#include "qgd/graph_core.hpp"
#include "qgd/manifest.hpp"
#include "qgd/train.hpp"

using namespace qgd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::vector<std::string> notes;
  void note(std::string s) {
    std::cout << "    " << s << '\n' << std::flush;
    notes.push_back(std::move(s));
  }
};

double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-8);
}

// 1. build_state against the brute-force matching enumerator.
Outcome state_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const QuantumGraph g = random_graph(derive_seed(0xacce55, s));
    const StateVector got = build_state(g);
    const auto want = oracle::brute_force_state(g.weights);
    for (int k = 0; k < kNumKets; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
  }
  const double t = seconds_since(t0);
  o.note(fmt::format("max amplitude deviation {:.3e} over 1000 graphs (< 1e-12), {:.2f} s (< 10 s)", worst, t));
  o.pass = worst < 1e-12 && t < 10.0;
  return o;
}

// 2. analytic fixtures and the dense density-matrix oracle.
Outcome fixtures() {
  Outcome o;
  const StateVector ghz = normalize_state(build_state(ghz_fixture_graph()));
  const double f = fidelity(ghz_fixture_graph(), ghz_target());
  const double p = mean_purity(ghz);
  const double c = concurrence(ghz);
  const StateVector w = w_target().state;
  double dense_mean = 0.0;
  double dense_conc = 0.0;
  for (unsigned mask : oracle::bipartition_masks()) {
    const double q = oracle::dense_purity(w.amplitudes, mask);
    dense_mean += q / 7.0;
    dense_conc += std::sqrt(2.0 * (1.0 - q));
  }
  const double wp = mean_purity(w);
  const double wc = concurrence(w);
  o.note(fmt::format("GHZ fixture: fidelity {:.15f}, mean purity {:.15f}, concurrence {:.12f}", f, p, c));
  o.note(fmt::format("W state: mean purity {:.15f} (dense {:.15f}, 4/7 = {:.15f}), concurrence {:.6f} (dense {:.6f})",
                     wp, dense_mean, 4.0 / 7.0, wc, dense_conc));
  o.pass = std::abs(f - 1.0) <= 1e-12 && std::abs(p - 0.5) <= 1e-12 && std::abs(c - 7.0) <= 1e-9 &&
           std::abs(wp - 4.0 / 7.0) <= 1e-12 && std::abs(wp - dense_mean) <= 1e-12 &&
           std::abs(wc - dense_conc) <= 1e-9 && std::abs(wc - 6.4641) < 1e-4;
  return o;
}

// 3. analytic gradients against central differences.
Outcome gradients() {
  Outcome o;
  const auto t0 = Clock::now();
  constexpr double h = 1e-5;
  constexpr int kCases = 100;
  bool ok = true;

  for (Property prop : {Property::GHZFidelity, Property::WFidelity, Property::MeanPurity}) {
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const QuantumGraph g = random_graph(derive_seed(31, static_cast<std::uint64_t>(c)));
      const auto a = property_gradient(g, prop);
      Eigen::VectorXd an(kNumEdges), fd(kNumEdges);
      for (int i = 0; i < kNumEdges; ++i) {
        QuantumGraph up = g, dn = g;
        up[i] += h;
        dn[i] -= h;
        an[i] = a[i];
        fd[i] = (property_value(up, prop) - property_value(dn, prop)) / (2 * h);
      }
      worst = std::max(worst, rel_error(an, fd));
    }
    o.note(fmt::format("property {:6s}: worst relative error {:.3e} over {} graphs", property_name(prop), worst, kCases));
    ok = ok && worst < 1e-4;
  }

  {
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const Activation act = c % 2 ? Activation::elu(0.1) : Activation::relu();
      Mlp m = init_mlp({24, 16, 12, 1}, act, derive_seed(32, static_cast<std::uint64_t>(c)));
      const QuantumGraph g = random_graph(derive_seed(33, static_cast<std::uint64_t>(c)));
      Eigen::MatrixXd x(24, 3);
      for (int col = 0; col < 3; ++col)
        for (int r = 0; r < 24; ++r) x(r, col) = random_graph(derive_seed(34, 3 * c + col))[r];
      const Eigen::Vector3d y(0.1, 0.2, 0.3);
      const ParamGradients grads = param_gradients(m, x, y);
      auto blocks = parameter_blocks(m);
      const auto gb = parameter_blocks(grads);
      auto loss = [&] {
        const Eigen::RowVectorXd p = predict_batch(m, x);
        return (p.transpose() - y).squaredNorm() / 3.0;
      };
      std::vector<double> an, fd;
      std::mt19937_64 pick(static_cast<std::uint64_t>(c));
      for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int k = 0; k < 4; ++k) {
          const std::size_t i = pick() % blocks[b].size();
          const double keep = blocks[b][i];
          blocks[b][i] = keep + h;
          const double up = loss();
          blocks[b][i] = keep - h;
          const double dn = loss();
          blocks[b][i] = keep;
          an.push_back(gb[b][i]);
          fd.push_back((up - dn) / (2 * h));
        }
      const auto n = static_cast<Eigen::Index>(an.size());
      worst = std::max(worst, rel_error(Eigen::Map<Eigen::VectorXd>(an.data(), n), Eigen::Map<Eigen::VectorXd>(fd.data(), n)));
      (void)g;
    }
    o.note(fmt::format("parameter gradients: worst relative error {:.3e} over {} networks", worst, kCases));
    ok = ok && worst < 1e-4;
  }

  {
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
      const Mlp m = init_mlp({24, 20, 20, 1}, Activation::elu(0.1 + 0.009 * c), derive_seed(35, static_cast<std::uint64_t>(c)));
      QuantumGraph g = random_graph(derive_seed(36, static_cast<std::uint64_t>(c)));
      const Eigen::VectorXd an = input_gradient(m, g.weights);
      Eigen::VectorXd fd(kNumEdges);
      for (int i = 0; i < kNumEdges; ++i) {
        QuantumGraph up = g, dn = g;
        up[i] += h;
        dn[i] -= h;
        fd[i] = (predict(m, up.weights) - predict(m, dn.weights)) / (2 * h);
      }
      worst = std::max(worst, rel_error(an, fd));
    }
    o.note(fmt::format("input gradients (ELU): worst relative error {:.3e} over {} networks", worst, kCases));
    ok = ok && worst < 1e-4;
  }
  const double t = seconds_since(t0);
  o.note(fmt::format("{:.2f} s (< 60 s)", t));
  o.pass = ok && t < 60.0;
  return o;
}

// 4. desk-scale training run; the trained network feeds criterion 5.
constexpr const char* kDeskActivation = "elu";
constexpr double kDeskLearningRate = 3e-3;

Outcome desk_training(Mlp& trained) {
  Outcome o;
  const auto t0 = Clock::now();
  GenerateOptions g;
  g.n = 100000;
  g.seed = 2024;
  const Dataset ds = generate_dataset(g);
  const TrainingData data = to_training_data(ds);
  TrainConfig cfg;
  cfg.max_epochs = 500;
  cfg.lr_init = kDeskLearningRate;
  cfg.seed = 7;
  const TrainResult r = train(data, cfg, init_mlp({24, 128, 128, 128, 1}, parse_activation(kDeskActivation), 7),
                              [&](const EpochRecord& e) {
                                if (e.epoch % 50 == 0 || e.epoch == cfg.max_epochs - 1) {
                                  std::cout << fmt::format("    epoch {:3d} train {:.3e} test {:.3e} lr {:.2e}\n", e.epoch,
                                                           e.train_mse, e.test_mse, e.learning_rate)
                                            << std::flush;
                                }
                              });
  trained = r.model;
  const double t = seconds_since(t0);
  o.note(fmt::format("activation {}, lr {:.0e}, {} epochs, best test MSE {:.4e} at epoch {} (<= 5e-4), {:.0f} s (< 1800 s)",
                     kDeskActivation, kDeskLearningRate, r.history.epochs_run, r.history.final_test_mse, r.history.best_epoch, t));
  o.pass = r.history.final_test_mse <= 5e-4 && r.history.epochs_run <= 500 && t < 1800.0;
  return o;
}

// 5. dreamed fidelities leave the training distribution.
Outcome distribution_shift(const Mlp& m) {
  Outcome o;
  const auto t0 = Clock::now();
  bool any = false;
  for (double lr : {1e-4, 1e-3, 1e-2}) {
    DreamConfig cfg;
    cfg.steps = 2000;
    cfg.lr = lr;
    cfg.clamp = true;
    cfg.seed = 5;
    const DreamEnsembleResult e = dream_ensemble(m, Property::GHZFidelity, 200, cfg, 0.5);
    const ShiftReport r = shift_report(e, 0.5);
    const bool ok = r.fraction_above_cap >= 0.4 && r.mean_shift >= 0.3;
    o.note(fmt::format("lr {:.0e}: {} valid runs, mean {:.4f} -> {:.4f} (shift {:.4f}), max {:.4f}, {:.1f}% finals > 0.5 {}",
                       lr, r.runs, r.mean_initial, r.mean_final, r.mean_shift, r.max_final,
                       100.0 * r.fraction_above_cap, ok ? "[meets]" : ""));
    any = any || ok;
  }
  const double t = seconds_since(t0);
  o.note(fmt::format("{:.0f} s (< 900 s)", t));
  o.pass = any && t < 900.0;
  return o;
}

// 6. true-gradient ascent.
Outcome oracle_dreaming() {
  Outcome o;
  const auto t0 = Clock::now();
  constexpr int kStarts = 100;
  int reached = 0;
  int degenerate = 0;
  {
    DreamConfig cfg;
    cfg.steps = 5000;
    cfg.lr = 1e-2;
    cfg.snapshot_stride = 5000;
    for (int r = 0; r < kStarts; ++r) {
      try {
        const DreamTrajectory t = dream_oracle(random_graph(run_seed(66, r)), Property::GHZFidelity, cfg);
        reached += t.final().predicted >= 0.95;
      } catch (const DegenerateState&) {
        ++degenerate;
      }
    }
  }
  long violations = 0;
  long steps = 0;
  {
    DreamConfig cfg;
    cfg.steps = 5000;
    cfg.lr = 1e-3;
    cfg.snapshot_stride = 5000;
    for (int r = 0; r < kStarts; ++r) {
      try {
        const DreamTrajectory t = dream_oracle(random_graph(run_seed(66, r)), Property::GHZFidelity, cfg);
        violations += t.monotonicity_violations;
        steps += t.steps_taken;
      } catch (const DegenerateState&) {
        ++degenerate;
      }
    }
  }
  const double frac = static_cast<double>(reached) / kStarts;
  const double vrate = steps ? static_cast<double>(violations) / static_cast<double>(steps) : 1.0;
  const double t = seconds_since(t0);
  o.note(fmt::format("lr 1e-2: {}/{} starts reach fidelity >= 0.95 within 5000 steps ({:.0f}%, need >= 80%)", reached,
                     kStarts, 100.0 * frac));
  o.note(fmt::format("lr 1e-3: {} violations over {} steps ({:.4f}%, need < 0.1%); {} degenerate runs; {:.0f} s (< 300 s)",
                     violations, steps, 100.0 * vrate, degenerate, t));
  o.pass = frac >= 0.8 && vrate < 1e-3 && t < 300.0;
  return o;
}

// 7. entropy machinery end to end.
Outcome entropy_machinery() {
  Outcome o;
  bool ok = true;
  {
    PMProbabilityArray spike, two, uniform;
    spike.probs[1][3] = 0.7;
    two.probs[0][0] = 0.2;
    two.probs[2][15] = 0.2;
    for (auto& row : uniform.probs) row.fill(1.0);
    const std::array<PMProbabilityArray, 1> a{spike}, b{two}, c{uniform};
    const double h0 = neuron_entropy(a), h1 = neuron_entropy(b), h48 = neuron_entropy(c);
    o.note(fmt::format("fixtures: spike {:.3e}, two spikes {:.15f}, uniform {:.15f} (log2 48 = {:.15f})", h0, h1, h48,
                       std::log2(48.0)));
    ok = std::abs(h0) <= 1e-12 && std::abs(h1 - 1.0) <= 1e-12 && std::abs(h48 - std::log2(48.0)) <= 1e-12;
  }
  const auto t0 = Clock::now();
  GenerateOptions g;
  g.n = 20000;
  g.seed = 77;
  TrainConfig tc;
  tc.batch_size = 1000;
  tc.max_epochs = 60;
  tc.lr_init = 3e-3;
  const TrainResult r = train(to_training_data(generate_dataset(g)), tc,
                              init_mlp({24, 49, 49, 49, 49, 1}, Activation::relu(), 77));
  o.note(fmt::format("[24,49,49,49,49,1] GHZ net: test MSE {:.3e} after {} epochs", r.history.final_test_mse,
                     r.history.epochs_run));
  DreamConfig dc;
  dc.steps = 2000;
  dc.lr = 1e-2;
  dc.seed = 78;
  const EntropyProfile p = entropy_profile(r.model, 20, dc);
  bool in_range = p.per_layer.size() == 4;
  int defined = 0;
  for (const auto& n : p.per_neuron) {
    if (!n.entropy) continue;
    ++defined;
    in_range = in_range && *n.entropy >= 0.0 && *n.entropy <= 5.585;
  }
  std::string shape;
  for (const auto& l : p.per_layer) {
    o.note(fmt::format("layer {}: mean H {} over {} neurons ({} excluded)", l.layer,
                       l.undefined ? std::string("undefined") : fmt::format("{:.4f}", l.mean), l.counted, l.excluded));
  }
  o.note(fmt::format("{} of {} neurons defined, all within [0, 5.585]: {}; {:.0f} s", defined, p.per_neuron.size(),
                     in_range ? "yes" : "no", seconds_since(t0)));
  o.pass = ok && in_range && defined > 0;
  return o;
}

// 8. CLI reruns produce byte-identical artifacts.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Manifests carry wall time; everything else must match.
std::string without_wall_time(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("wall_time_seconds=", 0) != 0) out += line + '\n';
  return out;
}

Outcome cli_determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "qgd_acceptance_cli";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"gen", "gen --property ghz --n 3000 --seed 4 --out data.qgdd"},
      {"train", "train --data data.qgdd --layers 24,16,16,1 --batch-size 500 --max-epochs 15 --lr 3e-3 --out model.ckpt"},
      {"dream", "dream --model model.ckpt --runs 6 --trajectories 2 --steps 200 --lr 1e-2 --seed 3 --out-dir dreams"},
      {"dream-neuron", "dream-neuron --model model.ckpt --layer 1 --neuron 2 --inits 4 --steps 100 --lr 1e-2 --out neuron.csv"},
      {"entropy", "entropy --model model.ckpt --inits 2 --steps 50 --lr 1e-2 --out entropy.csv"},
      {"activations", "activations --model model.ckpt --fixture ghz --out activations.csv"},
      {"shift", "shift --ensemble dreams/ensemble.csv --out shift.csv"},
      {"export", "export --graph dreams/trajectory_0.csv --threshold 0.3 --out graph.dot"},
  };
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    for (const auto& [name, args] : steps) {
      const std::string cmd = fmt::format("cd '{}' && '{}' {} > /dev/null 2>&1", dir.string(), QGD_CLI_PATH, args);
      if (std::system(cmd.c_str()) != 0) {
        o.note(fmt::format("run {}: `{}` failed", run, name));
        ok = false;
      }
    }
  }
  int compared = 0;
  int differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    const fs::path twin = root / "b" / rel;
    std::string x = slurp(entry.path());
    std::string y = fs::exists(twin) ? slurp(twin) : std::string("<missing>");
    if (rel.extension() == ".manifest") {
      x = without_wall_time(x);
      y = without_wall_time(y);
    }
    ++compared;
    if (x != y) {
      ++differing;
      o.note(fmt::format("artifact {} differs between reruns", rel.string()));
    }
  }
  o.note(fmt::format("{} subcommands, {} artifacts compared, {} differ", steps.size(), compared, differing));
  o.pass = ok && differing == 0 && compared >= 2 * static_cast<int>(steps.size());
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion numbers restrict the run, e.g. `acceptance 1 2 3`.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

  Mlp desk_net;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"state construction matches brute-force matching enumerator", state_oracle},
      {"analytic fixtures and dense partial-trace oracle", fixtures},
      {"gradients match central finite differences", gradients},
      {"desk-scale GHZ training reaches test MSE <= 5e-4", [&] { return desk_training(desk_net); }},
      {"dreamed fidelities exceed the dataset cap",
       [&] {
         if (desk_net.layers.empty()) {
           Outcome skipped;
           skipped.note("needs the network from criterion 4");
           return skipped;
         }
         return distribution_shift(desk_net);
       }},
      {"oracle dreaming reaches GHZ and stays monotone", oracle_dreaming},
      {"entropy fixtures and end-to-end profile", entropy_machinery},
      {"CLI reruns reproduce byte-identical artifacts", cli_determinism},
  };

  std::vector<std::string> summary;
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!wanted(n) && !(n == 4 && wanted(5))) continue;
    std::cout << fmt::format("[{}] {}\n", n, criteria[i].first) << std::flush;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.note(fmt::format("threw: {}", e.what()));
      o.pass = false;
    }
    if (!wanted(n)) continue;
    summary.push_back(fmt::format("{} criterion {}: {}", o.pass ? "PASS" : "FAIL", n, criteria[i].first));
    all = all && o.pass;
  }
  std::cout << '\n';
  for (const auto& line : summary) std::cout << line << '\n';
  return all ? 0 : 1;
}
