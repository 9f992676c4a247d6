#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "qgd/adam.hpp"
#include "qgd/mlp.hpp"

namespace qgd {

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One column per example.
struct TrainingData {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd labels;

  Eigen::Index size() const { return labels.size(); }
};

struct TrainConfig {
  int batch_size = 5000;
  double test_fraction = 0.05;
  double lr_init = 1e-3;
  double lr_decay = 0.95;
  int plateau_window = 25;
  /// Relative improvement of the best test MSE over one window below which
  /// the learning rate decays.
  double plateau_threshold = 1e-3;
  int convergence_patience = 400;
  int max_epochs = 5000;
  std::optional<double> label_cap = 0.5;
  std::uint64_t seed = 0;
  AdamConfig adam;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double learning_rate = 0.0;
};

struct TrainHistory {
  std::vector<double> train_mse;
  std::vector<double> test_mse;
  std::vector<double> learning_rate;
  int epochs_run = 0;
  int best_epoch = -1;
  double final_test_mse = 0.0;  // test MSE of the returned parameters

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  Mlp model;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Shuffled mini-batch Adam on MSE with a 95:5-style held-out split, plateau
/// learning-rate decay and best-test-MSE early stopping. `initial` fixes the
/// architecture and starting parameters.
TrainResult train(const TrainingData& data, const TrainConfig& config, Mlp initial,
                  const EpochCallback& on_epoch = {});

double evaluate(const Mlp& m, const TrainingData& data);
double evaluate(const Mlp& m, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels);

/// Deterministic train/test index split used by `train`.
struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};
Split split_indices(Eigen::Index n, double test_fraction, std::uint64_t seed);

}  // namespace qgd
