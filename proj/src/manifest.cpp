#include "qgd/manifest.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>

namespace qgd {

std::string bytes_checksum(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}' for checksumming", path.string()));
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes_checksum(bytes);
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write manifest '{}'", path.string()));
  out << "subcommand=" << subcommand << '\n';
  for (const auto& [k, v] : config) out << "config." << k << '=' << v << '\n';
  for (const auto& [k, v] : seeds) out << "seed." << k << '=' << v << '\n';
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out << "input." << i << '=' << inputs[i].string() << '\n';
    out << "input." << i << ".checksum=" << file_checksum(inputs[i]) << '\n';
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    out << "output." << i << '=' << outputs[i].string() << '\n';
    out << "output." << i << ".checksum=" << file_checksum(outputs[i]) << '\n';
  }
  out << fmt::format("wall_time_seconds={:.3f}\n", wall_time_seconds);
}

}  // namespace qgd
