// Orthographic rasterizer for the overhead and wrist cameras.
#include <algorithm>
#include <cmath>

#include "graspq/world/grasp_world.hpp"

namespace graspq::world {

namespace {

struct Surface {
  double rgb[3];
  double height;
};

constexpr Surface kTable{{0.55, 0.47, 0.36}, 0.0};
constexpr double kFingerShade = 0.2;

// Object and table as seen from above.
class Scene {
 public:
  explicit Scene(const WorldState& s)
      : s_(s), g_(geometry(s.object_kind)), c_(std::cos(s.object.yaw)), sn_(std::sin(s.object.yaw)) {}

  Surface at(double x, double y) const;

 private:
  const WorldState& s_;
  const ObjectGeometry& g_;
  double c_, sn_;
};

Surface Scene::at(double x, double y) const {
  const WorldState& s = s_;
  const ObjectGeometry& g = g_;
  const double dx = x - s.object.x, dy = y - s.object.y;
  const double a = dx * c_ + dy * sn_;    // along the object's yaw axis
  const double b = -dx * sn_ + dy * c_;   // across it
  double top = -1.0;
  if (g.footprint == ObjectGeometry::Footprint::kDisk) {
    const double r2 = a * a + b * b;
    if (r2 <= g.half_length * g.half_length) top = g.height / 2.0 + std::sqrt(g.half_length * g.half_length - r2);
  } else if (std::abs(a) <= g.half_length && std::abs(b) <= g.half_width) {
    if (s.object_kind == ObjectKind::kCylinder) {
      top = g.height / 2.0 + std::sqrt(std::max(0.0, g.half_width * g.half_width - b * b));
    } else {
      top = g.height;
    }
  }
  if (top < 0.0) return kTable;
  const double base = s.object_held ? s.gripper.z : 0.0;
  return {{g.color[0], g.color[1], g.color[2]}, std::min(1.0, base + top)};
}

// Finger pads at gripper-frame offset (across, along).
bool finger_at(const WorldConfig& cfg, double aperture, double across, double along) {
  if (std::abs(along) > cfg.finger_half_width) return false;
  const double inner = aperture / 2.0;
  const double d = std::abs(across);
  return d >= inner && d <= inner + cfg.finger_thickness;
}

template <class SampleFn>
tensornet::Tensor rasterize(std::size_t size, int ss, std::size_t channels, SampleFn&& sample) {
  tensornet::Tensor img({channels, size, size});
  const double inv = 1.0 / double(ss * ss);
  const std::size_t plane = size * size;
  for (std::size_t row = 0; row < size; ++row) {
    for (std::size_t col = 0; col < size; ++col) {
      double acc[4] = {0.0, 0.0, 0.0, 0.0};
      for (int si = 0; si < ss; ++si) {
        for (int sj = 0; sj < ss; ++sj) {
          const double v = (double(row) + (si + 0.5) / ss) / double(size);
          const double u = (double(col) + (sj + 0.5) / ss) / double(size);
          const Surface surf = sample(u, v);
          acc[0] += surf.rgb[0];
          acc[1] += surf.rgb[1];
          acc[2] += surf.rgb[2];
          acc[3] += surf.height;
        }
      }
      for (std::size_t ch = 0; ch < channels; ++ch) img[ch * plane + row * size + col] = acc[ch] * inv;
    }
  }
  return img;
}

}  // namespace

tensornet::Tensor GraspWorld::render_overhead(const WorldState& s) const {
  const WorldConfig& cfg = config_;
  const double span = cfg.overhead_max - cfg.overhead_min;
  const double aperture = current_aperture(s);
  const double c = std::cos(s.gripper.yaw), sn = std::sin(s.gripper.yaw);
  const Scene scene(s);
  return rasterize(cfg.image_size, cfg.supersample, 4, [&](double u, double v) {
    const double x = cfg.overhead_min + u * span;
    const double y = cfg.overhead_min + v * span;
    const double dx = x - s.gripper.x, dy = y - s.gripper.y;
    if (finger_at(cfg, aperture, dx * c + dy * sn, -dx * sn + dy * c)) {
      return Surface{{kFingerShade, kFingerShade, kFingerShade}, std::clamp(s.gripper.z, 0.0, 1.0)};
    }
    return scene.at(x, y);
  });
}

tensornet::Tensor GraspWorld::render_wrist(const WorldState& s) const {
  const WorldConfig& cfg = config_;
  const double h = cfg.wrist_half_extent;
  const double aperture = current_aperture(s);
  const double c = std::cos(s.gripper.yaw), sn = std::sin(s.gripper.yaw);
  const Scene scene(s);
  // Columns follow the closing axis, rows the finger axis.
  return rasterize(cfg.image_size, cfg.supersample, 3, [&](double u, double v) {
    const double across = -h + 2.0 * h * u;
    const double along = -h + 2.0 * h * v;
    if (finger_at(cfg, aperture, across, along)) {
      return Surface{{kFingerShade, kFingerShade, kFingerShade}, 0.0};
    }
    const double x = s.gripper.x + across * c - along * sn;
    const double y = s.gripper.y + across * sn + along * c;
    return scene.at(x, y);
  });
}

}  // namespace graspq::world
