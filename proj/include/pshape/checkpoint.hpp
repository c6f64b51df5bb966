#pragma once

#include <string>

#include "pshape/models.hpp"

namespace pshape {

inline constexpr char kCheckpointMagic[4] = {'P', 'S', 'A', 'F'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Serialized model: magic, version, JSON architecture header, little-endian
// 64-bit float parameter blob in header-declared order, CRC-32 of the blob.
void save_checkpoint(Model& model, const std::string& path, int epoch = 0);

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  int epoch = 0;
};

// Throws CorruptionError on bad magic/version/checksum/truncation and
// ConfigError when the header disagrees with its own parameter manifest.
LoadedCheckpoint load_checkpoint(const std::string& path);

// As above, but additionally rejects checkpoints whose architecture differs
// from `expected`, naming both sides.
LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig& expected);

}  // namespace pshape
