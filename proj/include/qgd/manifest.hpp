#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qgd {

/// 64-bit FNV-1a of a file's bytes, as 16 lowercase hex digits.
std::string file_checksum(const std::filesystem::path& path);
std::string bytes_checksum(const std::string& bytes);

/// key=value record written next to every CLI artifact.
struct RunManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  double wall_time_seconds = 0.0;

  /// Checksums are computed from the output files at write time.
  void write(const std::filesystem::path& path) const;
};

}  // namespace qgd
