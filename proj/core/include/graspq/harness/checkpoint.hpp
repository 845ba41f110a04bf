#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "graspq/agent/qtable.hpp"
#include "graspq/tensornet/param_set.hpp"

namespace graspq::harness {

struct CheckpointMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t episodes = 0;
  /// Canonical config text of the run that produced the parameters.
  std::string config_text;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  tensornet::ParamSet params;
  CheckpointMeta meta;
};

/// "GQCK", u32 version, u64 config hash, u64 episodes, u32-prefixed config
/// text, u64-prefixed GQN1 parameter payload; little-endian throughout.
std::vector<std::uint8_t> encode_checkpoint(const tensornet::ParamSet& params, const CheckpointMeta& meta);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const tensornet::ParamSet& params, const CheckpointMeta& meta,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Tabular policies travel in the same container as a single
/// "qtable.rows" entry of [code, q_0 .. q_8] rows sorted by code.
tensornet::ParamSet qtable_to_params(const agent::QTable& table);
agent::QTable qtable_from_params(const tensornet::ParamSet& params);

}  // namespace graspq::harness
