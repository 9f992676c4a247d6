#pragma once

// Plain-text network checkpoints. Every number is printed with 17 significant
// digits so save -> load reproduces each parameter bit for bit.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "qgd/mlp.hpp"

namespace qgd {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_checkpoint(std::ostream& out, const Mlp& m);
Mlp read_checkpoint(std::istream& in);

std::string checkpoint_to_string(const Mlp& m);
Mlp checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Mlp& m);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace qgd
