// qgdream: command-line driver for the graph dreaming workflow.
//
//   qgdream gen          --property ghz --n 10000 --seed 1 --out data.qgdd
//   qgdream train        --data data.qgdd --layers 24,128,128,128,1 --out model.ckpt
//   qgdream dream        --model model.ckpt --runs 200 --steps 2000 --lr 1e-2 --out-dir dreams
//   qgdream dream-neuron --model model.ckpt --layer 2 --neuron 5 --out neuron.csv
//   qgdream entropy      --model model.ckpt --inits 20 --out entropy.csv
//   qgdream activations  --model model.ckpt --fixture ghz --out activations.csv
//   qgdream shift        --ensemble dreams/ensemble.csv --out shift.csv
//   qgdream export       --graph dreams/trajectory_0.csv --threshold 0.4 --out graph.dot
//
// Every subcommand accepts --config <file> with flat key=value lines whose keys
// are the long option names; flags given on the command line win. A
// <primary output>.manifest file records the configuration, seeds and
// artifact checksums.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qgd/analysis.hpp"
#include "qgd/checkpoint.hpp"
#include "qgd/dataset.hpp"
#include "qgd/dot_export.hpp"
#include "qgd/dreaming.hpp"
#include "qgd/graph_core.hpp"
#include "qgd/manifest.hpp"
#include "qgd/tables.hpp"
#include "qgd/train.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kInput = 3, kRuntime = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config file '{}'", path.string()));
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("{}:{}: expected key=value", path.string(), lineno));
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

// Splices `--key value` for every config entry the command line does not
// already set, so explicit flags override the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::optional<fs::path> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (!config) return out;
  auto given = [&out](const std::string& key) {
    for (const auto& a : out)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& [k, v] : read_config_file(*config)) {
    if (!given(k)) out.push_back("--" + k + "=" + v);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> config_echo(const CLI::App& sub) {
  std::vector<std::pair<std::string, std::string>> echo;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    echo.emplace_back(name, value);
  }
  return echo;
}

std::vector<int> parse_layers(const std::string& text) {
  std::vector<int> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      sizes.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad layer size '{}' in --layers", item));
    }
  }
  if (sizes.size() < 2 || sizes.front() != qgd::kNumEdges || sizes.back() != 1) {
    throw UsageError(fmt::format("--layers must start with {} and end with 1, got '{}'", qgd::kNumEdges, text));
  }
  return sizes;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_out(const fs::path& p) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
  return out;
}

struct GraphSource {
  std::string file;
  std::string fixture;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* sub) {
    sub->add_option("--graph", file, "Graph file (24 weights, or a trajectory table: last row)");
    sub->add_option("--fixture", fixture, "Built-in graph: ghz");
    sub->add_option("--graph-seed", seed, "Uniform random graph from this seed");
  }

  qgd::QuantumGraph load() const {
    const int given = !file.empty() + !fixture.empty() + seed.has_value();
    if (given != 1) throw UsageError("give exactly one of --graph, --fixture, --graph-seed");
    if (!file.empty()) return qgd::load_graph(file);
    if (seed) return qgd::random_graph(*seed);
    if (fixture == "ghz") return qgd::ghz_fixture_graph();
    throw UsageError(fmt::format("unknown fixture '{}'", fixture));
  }

  std::vector<fs::path> inputs() const {
    if (!file.empty()) return {file};
    return {};
  }
};

struct DreamFlags {
  int steps = 2000;
  double lr = 1e-4;
  int stride = 10;
  bool clamp = true;
  std::string rule = "plain";
  std::uint64_t seed = 0;

  void add_to(CLI::App* sub) {
    sub->add_option("--steps", steps, "Ascent steps")->capture_default_str();
    sub->add_option("--lr", lr, "Ascent learning rate")->capture_default_str();
    sub->add_option("--stride", stride, "Snapshot stride")->capture_default_str();
    sub->add_option("--clamp", clamp, "Project weights onto [-1,1] after each step")->capture_default_str();
    sub->add_option("--rule", rule, "plain or adam")->capture_default_str()->check(CLI::IsMember({"plain", "adam"}));
    sub->add_option("--seed", seed, "Seed for starting graphs")->capture_default_str();
  }

  qgd::DreamConfig config() const {
    qgd::DreamConfig c;
    c.steps = steps;
    c.lr = lr;
    c.snapshot_stride = stride;
    c.clamp = clamp;
    c.seed = seed;
    c.rule = rule == "adam" ? qgd::AscentRule::Adam : qgd::AscentRule::Plain;
    return c;
  }
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish(qgd::RunManifest& m, const CLI::App& sub, const Timer& t, const fs::path& manifest_path) {
  m.subcommand = sub.get_name();
  m.config = config_echo(sub);
  m.wall_time_seconds = t.seconds();
  m.write(manifest_path);
}

fs::path manifest_for(const fs::path& primary) { return fs::path(primary.string() + ".manifest"); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum graph deep dreaming: datasets, training, dreaming and analysis"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a capped dataset of random graphs and labels");
  std::string gen_property = "ghz";
  std::size_t gen_n = 1000;
  double gen_cap = 0.5;
  bool gen_no_cap = false;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--property", gen_property, "ghz, w or purity")->capture_default_str();
  gen->add_option("--n", gen_n, "Number of records")->capture_default_str();
  gen->add_option("--cap", gen_cap, "Keep labels strictly below this value")->capture_default_str();
  gen->add_flag("--no-cap", gen_no_cap, "Keep every label (evaluation sets)");
  gen->add_option("--seed", gen_seed, "Generation seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Dataset file")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a network on a dataset file");
  std::string tr_data;
  std::string tr_layers = "24,128,128,128,1";
  std::string tr_activation = "relu";
  qgd::TrainConfig tr_cfg;
  double tr_cap = 0.5;
  bool tr_no_cap = false;
  std::uint64_t tr_init_seed = 0;
  std::string tr_out;
  std::string tr_history;
  bool tr_verbose = false;
  tr->add_option("--data", tr_data, "Dataset file")->required();
  tr->add_option("--layers", tr_layers, "Comma-separated layer sizes")->capture_default_str();
  tr->add_option("--activation", tr_activation, "relu, elu, elu:<alpha> or identity")->capture_default_str();
  tr->add_option("--batch-size", tr_cfg.batch_size)->capture_default_str();
  tr->add_option("--test-fraction", tr_cfg.test_fraction)->capture_default_str();
  tr->add_option("--lr", tr_cfg.lr_init)->capture_default_str();
  tr->add_option("--lr-decay", tr_cfg.lr_decay)->capture_default_str();
  tr->add_option("--plateau-window", tr_cfg.plateau_window)->capture_default_str();
  tr->add_option("--plateau-threshold", tr_cfg.plateau_threshold)->capture_default_str();
  tr->add_option("--patience", tr_cfg.convergence_patience)->capture_default_str();
  tr->add_option("--max-epochs", tr_cfg.max_epochs)->capture_default_str();
  tr->add_option("--label-cap", tr_cap)->capture_default_str();
  tr->add_flag("--no-label-cap", tr_no_cap, "Do not check labels against a cap");
  tr->add_option("--seed", tr_cfg.seed, "Split and shuffle seed")->capture_default_str();
  tr->add_option("--init-seed", tr_init_seed, "Parameter initialization seed")->capture_default_str();
  tr->add_option("--out", tr_out, "Checkpoint file")->required();
  tr->add_option("--history", tr_history, "History table (default <out>.history.csv)");
  tr->add_flag("--verbose", tr_verbose, "Print one line per epoch");

  // dream
  auto* dr = app.add_subcommand("dream", "Dream on the output of a trained network");
  std::string dr_model;
  std::string dr_property = "ghz";
  int dr_runs = 1;
  int dr_traj = 1;
  double dr_cap = 0.5;
  std::string dr_out_dir;
  double dr_max_failed = 0.5;
  DreamFlags dr_flags;
  dr->add_option("--model", dr_model, "Checkpoint file")->required();
  dr->add_option("--property", dr_property, "True property recorded along the way")->capture_default_str();
  dr->add_option("--runs", dr_runs, "Ensemble size")->capture_default_str();
  dr->add_option("--trajectories", dr_traj, "Write full trajectories for the first N runs")->capture_default_str();
  dr->add_option("--cap", dr_cap, "Cap for the above-cap fraction")->capture_default_str();
  dr->add_option("--max-failed", dr_max_failed, "Abort if more than this fraction of runs degenerate")
      ->capture_default_str();
  dr->add_option("--out-dir", dr_out_dir, "Output directory")->required();
  dr_flags.add_to(dr);

  // dream-neuron
  auto* dn = app.add_subcommand("dream-neuron", "Dream on a single neuron from several starts");
  std::string dn_model;
  int dn_layer = 1;
  int dn_neuron = 0;
  int dn_inits = 20;
  std::string dn_out;
  DreamFlags dn_flags;
  dn->add_option("--model", dn_model, "Checkpoint file")->required();
  dn->add_option("--layer", dn_layer, "Layer (1-based; the last is the output)")->capture_default_str();
  dn->add_option("--neuron", dn_neuron, "Neuron index within the layer")->capture_default_str();
  dn->add_option("--inits", dn_inits, "Number of starting graphs")->capture_default_str();
  dn->add_option("--out", dn_out, "Output table")->required();
  dn_flags.add_to(dn);

  // entropy
  auto* en = app.add_subcommand("entropy", "Per-neuron and per-layer PM entropy profile");
  std::string en_model;
  int en_inits = 20;
  std::string en_out;
  std::string en_summary;
  DreamFlags en_flags;
  en->add_option("--model", en_model, "Checkpoint file")->required();
  en->add_option("--inits", en_inits, "Dreams per neuron")->capture_default_str();
  en->add_option("--out", en_out, "Per-neuron table")->required();
  en->add_option("--summary", en_summary, "Per-layer table (default <out>.layers.csv)");
  en_flags.add_to(en);

  // activations
  auto* ac = app.add_subcommand("activations", "Globally normalized weighted activations for one input");
  std::string ac_model;
  double ac_threshold = 0.05;
  std::string ac_out;
  GraphSource ac_graph;
  ac->add_option("--model", ac_model, "Checkpoint file")->required();
  ac->add_option("--threshold", ac_threshold, "Keep entries at or above")->capture_default_str();
  ac->add_option("--out", ac_out, "Output table")->required();
  ac_graph.add_to(ac);

  // shift
  auto* sh = app.add_subcommand("shift", "Histogram initial vs dreamed true values of an ensemble");
  std::string sh_in;
  double sh_cap = 0.5;
  std::string sh_out;
  std::string sh_summary;
  sh->add_option("--ensemble", sh_in, "Ensemble table from `dream`")->required();
  sh->add_option("--cap", sh_cap)->capture_default_str();
  sh->add_option("--out", sh_out, "Histogram table")->required();
  sh->add_option("--summary", sh_summary, "Summary (default <out>.summary)");

  // export
  auto* ex = app.add_subcommand("export", "Write a graph as Graphviz DOT");
  double ex_threshold = 0.4;
  std::string ex_out;
  GraphSource ex_graph;
  ex->add_option("--threshold", ex_threshold, "Drop edges with |w| at or below")->capture_default_str();
  ex->add_option("--out", ex_out, "DOT file")->required();
  ex_graph.add_to(ex);

  try {
    // CLI11 consumes a vector in reverse order.
    std::vector<std::string> expanded = expand_config({argv + 1, argv + argc});
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error [usage]: " << e.what() << '\n';
    return kUsage;
  }

  Timer timer;
  try {
    qgd::RunManifest manifest;
    if (*gen) {
      qgd::GenerateOptions opts;
      opts.property = qgd::parse_property(gen_property);
      opts.n = gen_n;
      if (!gen_no_cap) opts.cap = gen_cap; else opts.cap.reset();
      opts.seed = gen_seed;
      const qgd::Dataset d = qgd::generate_dataset(opts);
      ensure_parent(gen_out);
      qgd::save_dataset(gen_out, d);
      manifest.seeds = {{"generation", gen_seed}};
      manifest.outputs = {gen_out};
      finish(manifest, *gen, timer, manifest_for(gen_out));
      std::cout << fmt::format("wrote {} {} records to {}\n", d.size(), qgd::property_name(d.property), gen_out);
    } else if (*tr) {
      const qgd::Dataset d = qgd::load_dataset(tr_data);
      const qgd::TrainingData data = qgd::to_training_data(d);
      if (tr_no_cap) tr_cfg.label_cap.reset(); else tr_cfg.label_cap = tr_cap;
      qgd::Mlp init = qgd::init_mlp(parse_layers(tr_layers), qgd::parse_activation(tr_activation), tr_init_seed);
      qgd::EpochCallback cb;
      if (tr_verbose) {
        cb = [](const qgd::EpochRecord& r) {
          std::cout << fmt::format("epoch {:5d}  train {:.4e}  test {:.4e}  lr {:.3e}\n", r.epoch, r.train_mse,
                                   r.test_mse, r.learning_rate)
                    << std::flush;
        };
      }
      const qgd::TrainResult result = qgd::train(data, tr_cfg, std::move(init), cb);
      ensure_parent(tr_out);
      qgd::save_checkpoint(tr_out, result.model);
      const fs::path history = tr_history.empty() ? fs::path(tr_out + ".history.csv") : fs::path(tr_history);
      {
        auto out = open_out(history);
        qgd::write_history_csv(out, result.history);
      }
      manifest.seeds = {{"split_shuffle", tr_cfg.seed}, {"init", tr_init_seed}};
      manifest.inputs = {tr_data};
      manifest.outputs = {tr_out, history};
      finish(manifest, *tr, timer, manifest_for(tr_out));
      std::cout << fmt::format("trained {} epochs, best test MSE {:.4e} at epoch {}\n", result.history.epochs_run,
                               result.history.final_test_mse, result.history.best_epoch);
    } else if (*dr) {
      const qgd::Mlp model = qgd::load_checkpoint(dr_model);
      const qgd::Property prop = qgd::parse_property(dr_property);
      const qgd::DreamConfig cfg = dr_flags.config();
      const qgd::DreamEnsembleResult ens = qgd::dream_ensemble(model, prop, dr_runs, cfg, dr_cap);
      const int failed = dr_runs - ens.valid_runs;
      if (static_cast<double>(failed) > dr_max_failed * dr_runs) {
        throw std::runtime_error(fmt::format("{} of {} dream runs hit degenerate states", failed, dr_runs));
      }
      const fs::path dir = dr_out_dir;
      fs::create_directories(dir);
      const fs::path ens_path = dir / "ensemble.csv";
      {
        auto out = open_out(ens_path);
        qgd::write_ensemble_csv(out, ens);
      }
      manifest.outputs.push_back(ens_path);
      for (int r = 0; r < std::min(dr_traj, dr_runs); ++r) {
        const auto t = qgd::dream(model, ens.runs[static_cast<std::size_t>(r)].initial_graph, prop, cfg);
        const fs::path p = dir / fmt::format("trajectory_{}.csv", r);
        auto out = open_out(p);
        qgd::write_trajectory_csv(out, t);
        manifest.outputs.push_back(p);
      }
      manifest.seeds = {{"ensemble", cfg.seed}};
      manifest.inputs = {dr_model};
      finish(manifest, *dr, timer, dir / "dream.manifest");
      std::cout << fmt::format("{} runs: mean true {:.4f} -> {:.4f}, {:.1f}% above {}\n", ens.valid_runs,
                               ens.mean_initial, ens.mean_final, 100.0 * ens.fraction_final_above_cap, dr_cap);
    } else if (*dn) {
      const qgd::Mlp model = qgd::load_checkpoint(dn_model);
      const auto dreams = qgd::dream_neuron(model, {dn_layer, dn_neuron}, dn_inits, dn_flags.config());
      {
        auto out = open_out(dn_out);
        qgd::write_neuron_dreams_csv(out, dreams);
      }
      manifest.seeds = {{"starts", dn_flags.seed}};
      manifest.inputs = {dn_model};
      manifest.outputs = {dn_out};
      finish(manifest, *dn, timer, manifest_for(dn_out));
      std::vector<qgd::PMProbabilityArray> arrays;
      for (const auto& d : dreams) arrays.push_back(d.pm);
      try {
        std::cout << fmt::format("neuron ({}, {}): entropy {:.4f} bits over {} dreams\n", dn_layer, dn_neuron,
                                 qgd::neuron_entropy(arrays), dreams.size());
      } catch (const qgd::UndefinedEntropy&) {
        std::cout << fmt::format("neuron ({}, {}): all dreamed PM arrays are zero\n", dn_layer, dn_neuron);
      }
    } else if (*en) {
      const qgd::Mlp model = qgd::load_checkpoint(en_model);
      const qgd::EntropyProfile profile = qgd::entropy_profile(model, en_inits, en_flags.config());
      const fs::path summary = en_summary.empty() ? fs::path(en_out + ".layers.csv") : fs::path(en_summary);
      {
        auto out = open_out(en_out);
        qgd::write_entropy_csv(out, profile);
      }
      {
        auto out = open_out(summary);
        qgd::write_entropy_summary_csv(out, profile);
      }
      manifest.seeds = {{"starts", en_flags.seed}};
      manifest.inputs = {en_model};
      manifest.outputs = {en_out, summary};
      finish(manifest, *en, timer, manifest_for(en_out));
      for (const auto& l : profile.per_layer) {
        std::cout << fmt::format("layer {:2d}: mean H {} ({} neurons, {} excluded)\n", l.layer,
                                 l.undefined ? std::string("undefined") : fmt::format("{:.4f}", l.mean), l.counted,
                                 l.excluded);
      }
    } else if (*ac) {
      const qgd::Mlp model = qgd::load_checkpoint(ac_model);
      const qgd::QuantumGraph g = ac_graph.load();
      const auto map = qgd::weighted_activations(model, g.weights, ac_threshold);
      {
        auto out = open_out(ac_out);
        qgd::write_activations_csv(out, map);
      }
      manifest.inputs = ac_graph.inputs();
      manifest.inputs.insert(manifest.inputs.begin(), ac_model);
      if (ac_graph.seed) manifest.seeds = {{"graph", *ac_graph.seed}};
      manifest.outputs = {ac_out};
      finish(manifest, *ac, timer, manifest_for(ac_out));
      std::cout << fmt::format("{} entries kept, total mass {:.4f}\n", map.kept_entries().size(), map.total_mass);
    } else if (*sh) {
      std::ifstream in(sh_in);
      if (!in) throw qgd::TableError(fmt::format("cannot open '{}'", sh_in));
      const auto samples = qgd::read_ensemble_csv(in);
      const qgd::ShiftReport report = qgd::shift_report(samples, sh_cap);
      const fs::path summary = sh_summary.empty() ? fs::path(sh_out + ".summary") : fs::path(sh_summary);
      {
        auto out = open_out(sh_out);
        qgd::write_shift_csv(out, report);
      }
      {
        auto out = open_out(summary);
        qgd::write_shift_summary(out, report);
      }
      manifest.inputs = {sh_in};
      manifest.outputs = {sh_out, summary};
      finish(manifest, *sh, timer, manifest_for(sh_out));
      std::cout << fmt::format("{} runs: mean shift {:.4f}, {:.1f}% above {}\n", report.runs, report.mean_shift,
                               100.0 * report.fraction_above_cap, sh_cap);
    } else if (*ex) {
      const qgd::QuantumGraph g = ex_graph.load();
      {
        auto out = open_out(ex_out);
        out << qgd::export_dot(g, ex_threshold);
      }
      manifest.inputs = ex_graph.inputs();
      if (ex_graph.seed) manifest.seeds = {{"graph", *ex_graph.seed}};
      manifest.outputs = {ex_out};
      finish(manifest, *ex, timer, manifest_for(ex_out));
    }
  } catch (const UsageError& e) {
    std::cerr << "error [usage]: " << e.what() << '\n';
    return kUsage;
  } catch (const qgd::DomainError& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
    return kUsage;
  } catch (const qgd::DatasetVersionError& e) {
    std::cerr << "error [dataset-version]: " << e.what() << '\n';
    return kInput;
  } catch (const qgd::DatasetReadError& e) {
    std::cerr << "error [dataset]: " << e.what() << '\n';
    return kInput;
  } catch (const qgd::CheckpointError& e) {
    std::cerr << "error [checkpoint]: " << e.what() << '\n';
    return kInput;
  } catch (const qgd::TableError& e) {
    std::cerr << "error [table]: " << e.what() << '\n';
    return kInput;
  } catch (const qgd::GenerationError& e) {
    std::cerr << "error [generation]: " << e.what() << '\n';
    return kRuntime;
  } catch (const qgd::TrainingError& e) {
    std::cerr << "error [training]: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
