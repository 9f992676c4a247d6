#include "qgd/mlp.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include <fmt/format.h>

#include "qgd/rng.hpp"

namespace qgd {

namespace {

void check_input(const Mlp& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_size()) {
    throw ShapeError(fmt::format("input has {} entries, network expects {}", x.size(), m.input_size()));
  }
}

bool activates(const Mlp& m, int layer) { return layer + 1 < m.num_layers() || m.activate_output; }

Eigen::MatrixXd apply_activation(const Activation& act, const Eigen::MatrixXd& z) {
  switch (act.kind) {
    case ActivationKind::ReLU: return z.cwiseMax(0.0);
    case ActivationKind::ELU: return z.unaryExpr([&act](double v) { return act.apply(v); });
    case ActivationKind::Identity: return z;
  }
  return z;
}

Eigen::MatrixXd activation_derivative(const Activation& act, const Eigen::MatrixXd& z) {
  switch (act.kind) {
    case ActivationKind::ReLU:
      return (z.array() > 0.0).cast<double>().matrix();
    case ActivationKind::ELU:
      return z.unaryExpr([&act](double v) { return act.derivative(v); });
    case ActivationKind::Identity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

}  // namespace

double Activation::apply(double z) const {
  switch (kind) {
    case ActivationKind::ReLU: return z > 0.0 ? z : 0.0;
    case ActivationKind::ELU: return z > 0.0 ? z : alpha * std::expm1(z);
    case ActivationKind::Identity: return z;
  }
  return z;
}

double Activation::derivative(double z) const {
  switch (kind) {
    case ActivationKind::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case ActivationKind::ELU: return z > 0.0 ? 1.0 : alpha * std::exp(z);
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

std::string activation_name(const Activation& a) {
  switch (a.kind) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::ELU: return fmt::format("elu:{:.17g}", a.alpha);
    case ActivationKind::Identity: return "identity";
  }
  return "unknown";
}

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::relu();
  if (text == "identity") return Activation::identity();
  if (text == "elu") return Activation::elu(1.0);
  if (text.starts_with("elu:")) {
    std::string alpha(text.substr(4));
    char* end = nullptr;
    double a = std::strtod(alpha.c_str(), &end);
    if (end == alpha.c_str() || *end != '\0' || !(a > 0.0)) {
      throw std::invalid_argument(fmt::format("bad ELU alpha in '{}'", text));
    }
    return Activation::elu(a);
  }
  throw std::invalid_argument(fmt::format("unknown activation '{}'", text));
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

std::uint64_t Mlp::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const double* data, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : layers) {
    mix(l.weights.data(), l.weights.size());
    mix(l.bias.data(), l.bias.size());
  }
  return h;
}

void Mlp::validate() const {
  if (layer_sizes.size() < 2) throw ShapeError("network needs at least an input and an output size");
  if (layers.size() + 1 != layer_sizes.size()) {
    throw ShapeError(fmt::format("{} layer sizes but {} weight layers", layer_sizes.size(), layers.size()));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weights.rows() != layer_sizes[l + 1] || layer.weights.cols() != layer_sizes[l] ||
        layer.bias.size() != layer_sizes[l + 1]) {
      throw ShapeError(fmt::format("layer {} has shape {}x{} (bias {}), expected {}x{}", l,
                                   layer.weights.rows(), layer.weights.cols(), layer.bias.size(),
                                   layer_sizes[l + 1], layer_sizes[l]));
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw ShapeError(fmt::format("layer {} has non-finite parameters", l));
    }
  }
}

Mlp init_mlp(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ShapeError("network needs at least an input and an output size");
  for (int s : layer_sizes) {
    if (s <= 0) throw ShapeError(fmt::format("layer size {} must be positive", s));
  }
  Mlp m;
  m.layer_sizes = layer_sizes;
  m.activation = activation;
  m.seed = seed;
  Engine rng = make_engine(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(1.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd(fan_out)};
    // Row-major fill so the draw order matches the checkpoint layout.
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = dist(rng);
    for (int r = 0; r < fan_out; ++r) layer.bias(r) = dist(rng);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

ForwardTrace forward(const Mlp& m, std::span<const double> x) {
  check_input(m, x);
  ForwardTrace t;
  t.activations.emplace_back(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
  for (int l = 0; l < m.num_layers(); ++l) {
    const auto& layer = m.layers[l];
    Eigen::VectorXd z = layer.weights * t.activations.back() + layer.bias;
    Eigen::VectorXd a = activates(m, l) ? Eigen::VectorXd(apply_activation(m.activation, z)) : z;
    t.pre_activations.push_back(std::move(z));
    t.activations.push_back(std::move(a));
  }
  t.output = t.activations.back()(0);
  return t;
}

double predict(const Mlp& m, std::span<const double> x) { return forward(m, x).output; }

Eigen::RowVectorXd predict_batch(const Mlp& m, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != m.input_size()) {
    throw ShapeError(fmt::format("batch has {} rows, network expects {}", inputs.rows(), m.input_size()));
  }
  Eigen::MatrixXd a = inputs;
  for (int l = 0; l < m.num_layers(); ++l) {
    Eigen::MatrixXd z = m.layers[l].weights * a;
    z.colwise() += m.layers[l].bias;
    a = activates(m, l) ? apply_activation(m.activation, z) : std::move(z);
  }
  return a.row(0);
}

ParamGradients param_gradients(const Mlp& m, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& labels) {
  const Eigen::Index n = inputs.cols();
  if (n == 0) throw ShapeError("empty batch");
  if (inputs.rows() != m.input_size() || labels.size() != n) {
    throw ShapeError(fmt::format("batch {}x{} with {} labels does not fit a {}-input network",
                                 inputs.rows(), n, labels.size(), m.input_size()));
  }
  const int depth = m.num_layers();
  std::vector<Eigen::MatrixXd> pre(depth);
  std::vector<Eigen::MatrixXd> post(depth + 1);
  post[0] = inputs;
  for (int l = 0; l < depth; ++l) {
    pre[l] = m.layers[l].weights * post[l];
    pre[l].colwise() += m.layers[l].bias;
    post[l + 1] = activates(m, l) ? apply_activation(m.activation, pre[l]) : pre[l];
  }

  const Eigen::RowVectorXd residual = post[depth].row(0) - labels.transpose();
  ParamGradients g;
  g.loss = residual.squaredNorm() / static_cast<double>(n);
  g.layers.resize(depth);

  Eigen::MatrixXd delta = (2.0 / static_cast<double>(n)) * residual;
  for (int l = depth - 1; l >= 0; --l) {
    if (activates(m, l)) delta = delta.cwiseProduct(activation_derivative(m.activation, pre[l]));
    g.layers[l].weights.noalias() = delta * post[l].transpose();
    g.layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = m.layers[l].weights.transpose() * delta;
      delta = std::move(back);
    }
  }
  return g;
}

Eigen::VectorXd input_gradient(const Mlp& m, std::span<const double> x) {
  const ForwardTrace t = forward(m, x);
  Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);
  for (int l = m.num_layers() - 1; l >= 0; --l) {
    if (activates(m, l)) {
      delta = delta.cwiseProduct(
          t.pre_activations[l].unaryExpr([&m](double v) { return m.activation.derivative(v); }));
    }
    delta = m.layers[l].weights.transpose() * delta;
  }
  return delta;
}

Mlp truncate_at_neuron(const Mlp& m, NeuronSelector sel) {
  const int depth = m.num_layers();
  if (sel.layer < 1 || sel.layer > depth) {
    throw std::out_of_range(fmt::format("layer {} outside [1,{}]", sel.layer, depth));
  }
  if (sel.neuron < 0 || sel.neuron >= m.layer_sizes[sel.layer]) {
    throw std::out_of_range(
        fmt::format("neuron {} outside layer {} of width {}", sel.neuron, sel.layer, m.layer_sizes[sel.layer]));
  }
  if (sel.layer == depth && m.output_size() == 1) return m;

  Mlp out;
  out.activation = m.activation;
  out.seed = m.seed;
  out.activate_output = sel.layer < depth || m.activate_output;
  out.layer_sizes.assign(m.layer_sizes.begin(), m.layer_sizes.begin() + sel.layer);
  out.layer_sizes.push_back(1);
  out.layers.assign(m.layers.begin(), m.layers.begin() + (sel.layer - 1));
  const auto& src = m.layers[sel.layer - 1];
  out.layers.push_back({src.weights.row(sel.neuron), src.bias.segment(sel.neuron, 1)});
  return out;
}

std::vector<std::span<double>> parameter_blocks(Mlp& m) {
  std::vector<std::span<double>> blocks;
  for (auto& l : m.layers) {
    blocks.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    blocks.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return blocks;
}

std::vector<std::span<const double>> parameter_blocks(const ParamGradients& g) {
  std::vector<std::span<const double>> blocks;
  for (const auto& l : g.layers) {
    blocks.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    blocks.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return blocks;
}

}  // namespace qgd
