#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pacrf/tensor.hpp"

namespace pacrf {

constexpr std::uint32_t kCheckpointVersion = 1;

// Versioned binary container: 8-byte magic "PACRFCKP", format version, a
// digest of the config text, the config text itself, the rng state, then
// length-prefixed named tensors (row-major doubles, little-endian).
struct CheckpointData {
  std::uint32_t version = kCheckpointVersion;
  std::string config_json;
  std::string rng_state;
  std::map<std::string, Tensor> tensors;
};

void write_checkpoint(const std::string& path, const CheckpointData& data);

// Throws CheckpointError on bad magic, version mismatch, digest mismatch or
// truncation.
CheckpointData read_checkpoint(const std::string& path);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace pacrf
