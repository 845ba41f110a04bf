#include "graspq/world/frame_dump.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace graspq::world {

namespace {

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void check_image(const tensornet::Tensor& image, std::size_t min_channels) {
  if (image.rank() != 3 || image.dim(0) < min_channels) {
    throw std::invalid_argument("expected [C,H,W] image with at least " + std::to_string(min_channels) +
                                " channels, got " + tensornet::shape_string(image.shape()));
  }
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const tensornet::Tensor& image) {
  check_image(image, 3);
  const std::size_t h = image.dim(1), w = image.dim(2), plane = h * w;
  auto out = open_binary(path);
  out << "P6\n" << w << ' ' << h << "\n255\n";
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) out.put(static_cast<char>(to_byte(image[c * plane + i])));
  }
}

void write_pgm(const std::filesystem::path& path, const tensornet::Tensor& image, std::size_t channel) {
  check_image(image, channel + 1);
  const std::size_t h = image.dim(1), w = image.dim(2), plane = h * w;
  auto out = open_binary(path);
  out << "P5\n" << w << ' ' << h << "\n255\n";
  for (std::size_t i = 0; i < plane; ++i) out.put(static_cast<char>(to_byte(image[channel * plane + i])));
}

void dump_observation(const std::filesystem::path& dir, const std::string& stem, const Observation& obs) {
  std::filesystem::create_directories(dir);
  write_ppm(dir / (stem + "_overhead.ppm"), obs.overhead);
  write_pgm(dir / (stem + "_height.pgm"), obs.overhead, 3);
  write_ppm(dir / (stem + "_wrist.ppm"), obs.wrist);
}

}  // namespace graspq::world
