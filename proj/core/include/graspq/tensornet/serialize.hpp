#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graspq/tensornet/param_set.hpp"

namespace graspq::tensornet {

/// Binary ParamSet payload.
///
///   "GQN1"
///   per entry, in order:
///     u32 name length, UTF-8 name bytes,
///     u32 rank, u32 per dimension,
///     one little-endian IEEE-754 binary64 per value
///
/// Entries run to the end of the buffer. Only values are stored: loaded
/// grads are zero, Adam state is not persisted, and the entry kind is
/// recovered from the name.
std::vector<std::uint8_t> serialize_params(const ParamSet& params);
ParamSet deserialize_params(std::span<const std::uint8_t> bytes);

}  // namespace graspq::tensornet
