#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "graspq/servo/train.hpp"

namespace graspq::harness {

struct RunConfig {
  servo::TrainConfig train;
  std::filesystem::path output_dir = "runs";
  /// Greedy episodes per object for cmd_eval.
  std::size_t eval_episodes = 100;
  /// cmd_ablate trains seeds seed, seed+1, ..., seed+ablate_seeds-1.
  std::size_t ablate_seeds = 5;
  /// cmd_train also writes PPM/PGM frames of one greedy episode under frames/.
  bool dump_frames = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// key=value lines, '#' starts a comment, unknown or repeated keys are
/// rejected, missing keys keep their defaults. Errors name the line and key.
RunConfig parse_config_text(std::string_view text, std::string_view source = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

/// Canonical text with every key; parses back to an equal config.
/// Output-only keys (output_dir, dump_frames) are left out when `include_output` is false.
std::string format_config(const RunConfig& config, bool include_output = true);

/// FNV-1a of the canonical text without output-only keys.
std::uint64_t config_hash(const RunConfig& config);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace graspq::harness
