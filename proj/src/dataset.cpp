#include "qgd/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "qgd/rng.hpp"

namespace qgd {

namespace {

constexpr char kMagic[4] = {'Q', 'G', 'D', 'D'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, std::string_view what) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DatasetReadError(fmt::format("dataset truncated while reading {}", what));
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

// Label of a graph as it will be stored: computed from the float-rounded
// weights, then rounded to float itself.
std::optional<float> stored_label(const QuantumGraph& g, Property prop) {
  try {
    return static_cast<float>(property_value(g, prop));
  } catch (const DegenerateState&) {
    return std::nullopt;
  }
}

QuantumGraph rounded(const QuantumGraph& g) {
  QuantumGraph out;
  for (int e = 0; e < kNumEdges; ++e) out[e] = static_cast<float>(g[e]);
  return out;
}

}  // namespace

DatasetVersionError::DatasetVersionError(std::uint32_t found_, std::uint32_t expected_)
    : DatasetReadError(fmt::format("dataset version {} is not supported (expected version {})", found_, expected_)),
      found(found_),
      expected(expected_) {}

QuantumGraph Dataset::graph(std::size_t i) const {
  QuantumGraph g;
  for (int e = 0; e < kNumEdges; ++e) g[e] = inputs.at(i)[static_cast<std::size_t>(e)];
  return g;
}

Dataset generate_dataset(const GenerateOptions& opts) {
  if (opts.n < 1) throw std::invalid_argument("dataset size must be at least 1");
  Dataset d;
  d.property = opts.property;
  d.seed = opts.seed;
  d.inputs.reserve(opts.n);
  d.labels.reserve(opts.n);
  std::size_t attempts = 0;
  for (std::size_t i = 0; i < opts.n; ++i) {
    Engine rng = make_engine(derive_seed(opts.seed, i));
    for (;;) {
      ++attempts;
      const QuantumGraph g = rounded(random_graph(rng));
      const std::optional<float> label = stored_label(g, opts.property);
      if (label && (!opts.cap || *label < *opts.cap)) {
        std::array<float, kNumEdges> row{};
        for (int e = 0; e < kNumEdges; ++e) row[static_cast<std::size_t>(e)] = static_cast<float>(g[e]);
        d.inputs.push_back(row);
        d.labels.push_back(*label);
        break;
      }
      const double accepted = static_cast<double>(i);
      if (attempts >= opts.abort_after && accepted < (1.0 - opts.max_rejection) * static_cast<double>(attempts)) {
        throw GenerationError(fmt::format(
            "rejection rate too high: {} of {} candidates accepted for property {} with cap {}", i, attempts,
            property_name(opts.property), opts.cap ? fmt::format("{}", *opts.cap) : std::string("none")));
      }
    }
  }
  return d;
}

void write_dataset(std::ostream& out, const Dataset& d) {
  if (d.inputs.size() != d.labels.size()) throw DatasetWriteError("inputs and labels differ in length");
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kDatasetVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(d.property));
  put_le<std::uint64_t>(out, d.size());
  put_le<std::uint64_t>(out, d.seed);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (float w : d.inputs[i]) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(w));
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(d.labels[i]));
  }
  if (!out) throw DatasetWriteError("dataset write failed");
}

Dataset read_dataset(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw DatasetReadError("dataset truncated while reading magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DatasetReadError("not a QGDD dataset (bad magic)");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kDatasetVersion) throw DatasetVersionError(version, kDatasetVersion);
  const auto tag = get_le<std::uint8_t>(in, "property tag");
  if (tag > static_cast<std::uint8_t>(Property::MeanPurity)) {
    throw DatasetReadError(fmt::format("unknown property tag {}", tag));
  }
  const auto n = get_le<std::uint64_t>(in, "record count");
  Dataset d;
  d.property = static_cast<Property>(tag);
  d.seed = get_le<std::uint64_t>(in, "seed");

  std::vector<unsigned char> buffer(kDatasetRecordBytes);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()))) {
      throw DatasetReadError(fmt::format("dataset truncated: header promises {} records, record {} is incomplete", n, i));
    }
    auto word = [&buffer](std::size_t k) {
      std::uint32_t v = 0;
      for (std::size_t b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(buffer[4 * k + b]) << (8 * b);
      return std::bit_cast<float>(v);
    };
    std::array<float, kNumEdges> row{};
    for (std::size_t e = 0; e < kNumEdges; ++e) row[e] = word(e);
    d.inputs.push_back(row);
    d.labels.push_back(word(kNumEdges));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DatasetReadError(fmt::format("trailing bytes after {} records", n));
  }
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetWriteError(fmt::format("cannot open '{}' for writing", path.string()));
  write_dataset(out, d);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetReadError(fmt::format("cannot open '{}'", path.string()));
  return read_dataset(in);
}

double spot_check(const Dataset& d, std::size_t checks, std::uint64_t seed) {
  if (d.size() == 0) return 0.0;
  Engine rng = make_engine(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
  double worst = 0.0;
  for (std::size_t c = 0; c < checks; ++c) {
    const std::size_t i = pick(rng);
    const std::optional<float> label = stored_label(d.graph(i), d.property);
    if (!label) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(static_cast<double>(*label) - static_cast<double>(d.labels[i])));
  }
  return worst;
}

TrainingData to_training_data(const Dataset& d) {
  TrainingData t;
  const auto n = static_cast<Eigen::Index>(d.size());
  t.inputs.resize(kNumEdges, n);
  t.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int e = 0; e < kNumEdges; ++e) t.inputs(e, i) = d.inputs[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)];
    t.labels(i) = d.labels[static_cast<std::size_t>(i)];
  }
  return t;
}

}  // namespace qgd
