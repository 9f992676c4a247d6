#include "qgd/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "qgd/rng.hpp"

namespace qgd {

namespace {

constexpr Eigen::Index kEvalChunk = 8192;

void gather(const TrainingData& data, std::span<const Eigen::Index> idx, Eigen::MatrixXd& x,
            Eigen::VectorXd& y) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  x.resize(data.inputs.rows(), n);
  y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.col(i) = data.inputs.col(idx[static_cast<std::size_t>(i)]);
    y(i) = data.labels(idx[static_cast<std::size_t>(i)]);
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(fmt::format("invalid training config: {}", what));
  };
  require(batch_size > 0, "batch_size must be positive");
  require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must lie in (0,1)");
  require(lr_init > 0.0, "lr_init must be positive");
  require(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay must lie in (0,1]");
  require(plateau_window > 0, "plateau_window must be positive");
  require(plateau_threshold >= 0.0, "plateau_threshold must be nonnegative");
  require(convergence_patience > 0, "convergence_patience must be positive");
  require(max_epochs > 0, "max_epochs must be positive");
  require(!label_cap || *label_cap > 0.0, "label_cap must be positive");
}

Split split_indices(Eigen::Index n, double test_fraction, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Engine rng = make_engine(derive_seed(seed, 0));
  std::shuffle(order.begin(), order.end(), rng);
  auto n_test = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<Eigen::Index>(n_test, 1, n - 1);
  Split s;
  s.train.assign(order.begin(), order.end() - n_test);
  s.test.assign(order.end() - n_test, order.end());
  return s;
}

double evaluate(const Mlp& m, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels) {
  const Eigen::Index n = labels.size();
  if (n == 0) throw std::invalid_argument("cannot evaluate on an empty set");
  if (inputs.cols() != n) throw ShapeError("inputs and labels disagree on example count");
  double sum = 0.0;
  for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
    const Eigen::Index len = std::min(kEvalChunk, n - start);
    const Eigen::RowVectorXd out = predict_batch(m, inputs.middleCols(start, len));
    sum += (out - labels.segment(start, len).transpose()).squaredNorm();
  }
  return sum / static_cast<double>(n);
}

double evaluate(const Mlp& m, const TrainingData& data) { return evaluate(m, data.inputs, data.labels); }

TrainResult train(const TrainingData& data, const TrainConfig& config, Mlp initial,
                  const EpochCallback& on_epoch) {
  config.validate();
  initial.validate();
  const Eigen::Index n = data.size();
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (data.inputs.cols() != n || data.inputs.rows() != initial.input_size()) {
    throw ShapeError(fmt::format("dataset is {}x{} with {} labels; network expects {} inputs",
                                 data.inputs.rows(), data.inputs.cols(), n, initial.input_size()));
  }
  if (n < config.batch_size) {
    throw std::invalid_argument(fmt::format("dataset has {} records, fewer than batch_size {}", n, config.batch_size));
  }
  if (config.label_cap) {
    const double top = data.labels.maxCoeff();
    if (!(top < *config.label_cap)) {
      throw std::invalid_argument(fmt::format("label {} is not below the cap {}", top, *config.label_cap));
    }
  }

  const Split split = split_indices(n, config.test_fraction, config.seed);
  Eigen::MatrixXd test_x;
  Eigen::VectorXd test_y;
  gather(data, split.test, test_x, test_y);

  Engine shuffle_rng = make_engine(derive_seed(config.seed, 1));
  std::vector<Eigen::Index> order = split.train;
  Mlp model = std::move(initial);
  Mlp best = model;
  Adam adam(config.adam);
  TrainHistory history;
  double lr = config.lr_init;
  double best_test = std::numeric_limits<double>::infinity();
  double window_reference = best_test;

  Eigen::MatrixXd batch_x;
  Eigen::VectorXd batch_y;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t len = std::min(order.size() - start, static_cast<std::size_t>(config.batch_size));
      gather(data, std::span<const Eigen::Index>(order).subspan(start, len), batch_x, batch_y);
      const ParamGradients grads = param_gradients(model, batch_x, batch_y);
      if (!std::isfinite(grads.loss)) {
        throw TrainingError(fmt::format("non-finite loss at epoch {} (batch starting at {}), lr {}", epoch, start, lr));
      }
      loss_sum += grads.loss * static_cast<double>(len);
      const auto params = parameter_blocks(model);
      const auto g = parameter_blocks(grads);
      adam.step(params, g, lr);
    }
    const double train_mse = loss_sum / static_cast<double>(order.size());
    const double test_mse = evaluate(model, test_x, test_y);
    if (!std::isfinite(test_mse)) throw TrainingError(fmt::format("non-finite test MSE at epoch {}", epoch));

    history.train_mse.push_back(train_mse);
    history.test_mse.push_back(test_mse);
    history.learning_rate.push_back(lr);
    history.epochs_run = epoch + 1;
    if (on_epoch) on_epoch({epoch, train_mse, test_mse, lr});

    if (test_mse < best_test) {
      best_test = test_mse;
      best = model;
      history.best_epoch = epoch;
    }
    if ((epoch + 1) % config.plateau_window == 0) {
      if (!(best_test < window_reference * (1.0 - config.plateau_threshold))) lr *= config.lr_decay;
      window_reference = best_test;
    }
    if (epoch - history.best_epoch >= config.convergence_patience) break;
  }
  history.final_test_mse = best_test;
  return {std::move(best), std::move(history)};
}

}  // namespace qgd
