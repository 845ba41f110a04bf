#pragma once

#include <filesystem>

#include "graspq/tensornet/tensor.hpp"
#include "graspq/world/types.hpp"

namespace graspq::world {

/// Binary PPM (P6) of channels 0..2 of a [C,H,W] image with values in [0,1].
void write_ppm(const std::filesystem::path& path, const tensornet::Tensor& image);

/// Binary PGM (P5) of one channel of a [C,H,W] image.
void write_pgm(const std::filesystem::path& path, const tensornet::Tensor& image, std::size_t channel);

/// Writes `<stem>_overhead.ppm`, `<stem>_height.pgm` and `<stem>_wrist.ppm` into `dir`.
void dump_observation(const std::filesystem::path& dir, const std::string& stem, const Observation& obs);

}  // namespace graspq::world
