#include "qgd/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace qgd {

namespace {

constexpr std::string_view kMagic = "qgd-checkpoint";

std::string expect_key(std::istream& in, std::string_view key) {
  std::string token;
  if (!(in >> token)) throw CheckpointError(fmt::format("checkpoint ended before '{}'", key));
  if (token != key) throw CheckpointError(fmt::format("expected '{}' but found '{}'", key, token));
  return token;
}

template <typename T>
T read_value(std::istream& in, std::string_view what) {
  T v{};
  if (!(in >> v)) throw CheckpointError(fmt::format("could not read {}", what));
  return v;
}

double read_double(std::istream& in, std::string_view what) {
  std::string token;
  if (!(in >> token)) throw CheckpointError(fmt::format("could not read {}", what));
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw CheckpointError(fmt::format("bad number '{}' in {}", token, what));
  }
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Mlp& m) {
  m.validate();
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  out << "seed " << m.seed << '\n';
  out << "activation " << activation_name(m.activation) << '\n';
  out << "activate_output " << (m.activate_output ? 1 : 0) << '\n';
  out << "layer_sizes " << m.layer_sizes.size();
  for (int s : m.layer_sizes) out << ' ' << s;
  out << '\n';
  for (int l = 0; l < m.num_layers(); ++l) {
    const auto& layer = m.layers[l];
    out << "layer " << l << ' ' << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
    out << "weights";
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      out << '\n';
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        if (c) out << ' ';
        out << fmt::format("{:.17g}", layer.weights(r, c));
      }
    }
    out << "\nbias\n";
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      if (r) out << ' ';
      out << fmt::format("{:.17g}", layer.bias(r));
    }
    out << '\n';
  }
  out << "end\n";
}

Mlp read_checkpoint(std::istream& in) {
  std::string magic;
  if (!(in >> magic) || magic != kMagic) throw CheckpointError("not a qgd checkpoint");
  const int version = read_value<int>(in, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(fmt::format("checkpoint version {} unsupported (this build reads {})", version,
                                      kCheckpointVersion));
  }
  Mlp m;
  expect_key(in, "seed");
  m.seed = read_value<std::uint64_t>(in, "seed");
  expect_key(in, "activation");
  try {
    m.activation = parse_activation(read_value<std::string>(in, "activation"));
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(e.what());
  }
  expect_key(in, "activate_output");
  m.activate_output = read_value<int>(in, "activate_output") != 0;
  expect_key(in, "layer_sizes");
  const auto count = read_value<std::size_t>(in, "layer count");
  if (count < 2 || count > 4096) throw CheckpointError(fmt::format("implausible layer count {}", count));
  for (std::size_t i = 0; i < count; ++i) {
    const int s = read_value<int>(in, "layer size");
    if (s <= 0) throw CheckpointError(fmt::format("layer size {} must be positive", s));
    m.layer_sizes.push_back(s);
  }
  for (std::size_t l = 0; l + 1 < count; ++l) {
    expect_key(in, "layer");
    const auto index = read_value<std::size_t>(in, "layer index");
    const auto rows = read_value<Eigen::Index>(in, "rows");
    const auto cols = read_value<Eigen::Index>(in, "cols");
    if (index != l || rows != m.layer_sizes[l + 1] || cols != m.layer_sizes[l]) {
      throw CheckpointError(fmt::format("layer header {} {}x{} does not match layer_sizes", index, rows, cols));
    }
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    expect_key(in, "weights");
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = read_double(in, "weights");
    expect_key(in, "bias");
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = read_double(in, "bias");
    m.layers.push_back(std::move(layer));
  }
  expect_key(in, "end");
  try {
    m.validate();
  } catch (const ShapeError& e) {
    throw CheckpointError(e.what());
  }
  return m;
}

std::string checkpoint_to_string(const Mlp& m) {
  std::ostringstream out;
  write_checkpoint(out, m);
  return out.str();
}

Mlp checkpoint_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_checkpoint(in);
}

void save_checkpoint(const std::filesystem::path& path, const Mlp& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(fmt::format("cannot open '{}' for writing", path.string()));
  write_checkpoint(out, m);
  if (!out) throw CheckpointError(fmt::format("write to '{}' failed", path.string()));
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("cannot open '{}'", path.string()));
  return read_checkpoint(in);
}

}  // namespace qgd
