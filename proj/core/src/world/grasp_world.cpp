#include "graspq/world/grasp_world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace graspq::world {

namespace {

constexpr double kEps = 1e-9;
constexpr double kPi = std::numbers::pi;

const ObjectGeometry kCube{ObjectGeometry::Footprint::kBox,
                           0.04, 0.04, 0.08,
                           0.05, 0.05, false,
                           true, 0.0, kPi / 2.0, kPi / 8.0,
                           {0.85, 0.15, 0.15}};

// Lying cylinder, axis along its yaw; the jaws must close across the axis.
const ObjectGeometry kCylinder{ObjectGeometry::Footprint::kBox,
                               0.08, 0.03, 0.06,
                               0.04, 0.06, false,
                               true, kPi / 2.0, kPi, kPi / 8.0,
                               {0.15, 0.7, 0.2}};

// Rolls unless centred: the smallest capture region.
const ObjectGeometry kSphere{ObjectGeometry::Footprint::kDisk,
                             0.03, 0.03, 0.06,
                             0.037, 0.037, true,
                             false, 0.0, 2.0 * kPi, kPi,
                             {0.15, 0.3, 0.9}};

// Object-frame sample points covering the footprint, for contact tests.
const std::vector<std::array<double, 2>>& footprint_samples(ObjectKind kind) {
  auto build = [](const ObjectGeometry& g) {
    std::vector<std::array<double, 2>> pts;
    constexpr int n = 9;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double a = -1.0 + 2.0 * i / (n - 1);
        const double b = -1.0 + 2.0 * j / (n - 1);
        if (g.footprint == ObjectGeometry::Footprint::kDisk && a * a + b * b > 1.0 + kEps) continue;
        pts.push_back({a * g.half_length, b * g.half_width});
      }
    }
    return pts;
  };
  static const std::vector<std::array<double, 2>> cube = build(kCube);
  static const std::vector<std::array<double, 2>> cylinder = build(kCylinder);
  static const std::vector<std::array<double, 2>> sphere = build(kSphere);
  switch (kind) {
    case ObjectKind::kCube: return cube;
    case ObjectKind::kCylinder: return cylinder;
    case ObjectKind::kSphere: return sphere;
  }
  return cube;
}

// Object centre in the gripper frame: `across` along the closing axis.
struct Offset {
  double across;
  double along;
};

Offset gripper_frame_offset(const WorldState& s, double wx, double wy) {
  const double dx = wx - s.gripper.x, dy = wy - s.gripper.y;
  const double c = std::cos(s.gripper.yaw), sn = std::sin(s.gripper.yaw);
  return {dx * c + dy * sn, -dx * sn + dy * c};
}

double projected_half_extent(const ObjectGeometry& g, double relative_yaw) {
  if (g.footprint == ObjectGeometry::Footprint::kDisk) return g.half_length;
  return g.half_length * std::abs(std::cos(relative_yaw)) + g.half_width * std::abs(std::sin(relative_yaw));
}

bool outside_unit(double v) { return v < -kEps || v > 1.0 + kEps; }

}  // namespace

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kCube: return "cube";
    case ObjectKind::kSphere: return "sphere";
    case ObjectKind::kCylinder: return "cylinder";
  }
  return "?";
}

std::optional<ObjectKind> parse_object_kind(std::string_view text) {
  for (ObjectKind k : kAllObjectKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

Action action_from_index(std::size_t index) {
  if (index >= kActionCount) throw std::out_of_range("action index " + std::to_string(index) + " out of range");
  return static_cast<Action>(index);
}

std::string_view to_string(Action a) {
  static constexpr std::array<std::string_view, kActionCount> names = {
      "+x", "-x", "+y", "-y", "+z", "-z", "+yaw", "-yaw", "close"};
  return names.at(index_of(a));
}

std::string_view to_string(StepEvent e) {
  switch (e) {
    case StepEvent::kExecuted: return "executed";
    case StepEvent::kNotExecuted: return "not_executed";
    case StepEvent::kContact: return "contact";
    case StepEvent::kSuccess: return "success";
    case StepEvent::kPartial: return "partial";
    case StepEvent::kFailure: return "failure";
  }
  return "?";
}

const ObjectGeometry& geometry(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kCube: return kCube;
    case ObjectKind::kCylinder: return kCylinder;
    case ObjectKind::kSphere: return kSphere;
  }
  return kCube;
}

double wrap_angle(double angle, double period) {
  return angle - period * std::floor(angle / period + 0.5);
}

double reward(const RewardContext& context) {
  switch (context.event) {
    case StepEvent::kSuccess: return kRewardSuccess;
    case StepEvent::kContact: return kRewardContact;
    case StepEvent::kPartial: return context.contact_already_rewarded ? kRewardStep : kRewardContact;
    case StepEvent::kNotExecuted: return kRewardNotExecuted;
    case StepEvent::kExecuted:
    case StepEvent::kFailure: return kRewardStep;
  }
  return kRewardStep;
}

GraspWorld::GraspWorld(WorldConfig config) : config_(config) {
  if (config_.image_size < 8) throw std::invalid_argument("image_size must be at least 8");
  if (config_.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  if (config_.supersample < 1) throw std::invalid_argument("supersample must be at least 1");
  if (!(config_.spawn_min < config_.spawn_max)) throw std::invalid_argument("empty spawn region");
}

WorldState GraspWorld::initial_state(std::uint64_t seed, ObjectKind kind) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(config_.spawn_min, config_.spawn_max);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  WorldState s;
  s.gripper = config_.home;
  s.object_kind = kind;
  s.object.x = pos(rng);
  s.object.y = pos(rng);
  s.object.yaw = yaw(rng);
  return s;
}

ResetResult GraspWorld::reset(std::uint64_t seed, ObjectKind kind) const {
  WorldState s = initial_state(seed, kind);
  Observation o = observe(s);
  return {s, std::move(o)};
}

double GraspWorld::current_aperture(const WorldState& s) const {
  if (s.gripper_open) return config_.open_aperture;
  if (!s.object_held) return 0.0;
  const ObjectGeometry& g = geometry(s.object_kind);
  return 2.0 * projected_half_extent(g, s.object.yaw - s.gripper.yaw);
}

bool GraspWorld::contact_check(const WorldState& s) const {
  if (s.gripper.z > config_.contact_height + kEps) return false;
  const double reach = current_aperture(s) / 2.0 + config_.finger_thickness;
  const double c = std::cos(s.object.yaw), sn = std::sin(s.object.yaw);
  for (const auto& p : footprint_samples(s.object_kind)) {
    const double wx = s.object.x + p[0] * c - p[1] * sn;
    const double wy = s.object.y + p[0] * sn + p[1] * c;
    const Offset o = gripper_frame_offset(s, wx, wy);
    if (std::abs(o.across) <= reach && std::abs(o.along) <= config_.finger_half_width) return true;
  }
  return false;
}

bool GraspWorld::capture_check(const WorldState& s) const {
  if (s.gripper.z > config_.grasp_height + kEps) return false;
  const ObjectGeometry& g = geometry(s.object_kind);
  const double relative_yaw = s.object.yaw - s.gripper.yaw;
  if (2.0 * projected_half_extent(g, relative_yaw) >= config_.open_aperture) return false;
  if (g.needs_alignment &&
      std::abs(wrap_angle(relative_yaw - g.align_offset, g.align_period)) > g.align_tolerance + kEps) {
    return false;
  }
  const Offset o = gripper_frame_offset(s, s.object.x, s.object.y);
  if (g.radial_capture) return std::hypot(o.across, o.along) <= g.capture_across + kEps;
  return std::abs(o.across) <= g.capture_across + kEps && std::abs(o.along) <= g.capture_along + kEps;
}

bool GraspWorld::is_success(const WorldState& s) const {
  return s.object_held && s.gripper.z >= config_.success_height - kEps;
}

StepResult GraspWorld::step(const WorldState& state, Action action) const {
  if (state.terminal) throw std::logic_error("step called on a terminal state");
  WorldState next = state;
  next.step_count += 1;
  StepEvent event = StepEvent::kExecuted;

  if (action == Action::kClose) {
    const bool touching = contact_check(next);
    next.gripper_open = false;
    if (capture_check(state)) next.object_held = true;
    next.gripper.z = std::max(next.gripper.z, config_.success_height);
    next.terminal = true;
    if (is_success(next)) {
      event = StepEvent::kSuccess;
    } else {
      event = touching ? StepEvent::kPartial : StepEvent::kFailure;
    }
  } else {
    GripperPose p = next.gripper;
    const double t = config_.translation_step;
    switch (action) {
      case Action::kPlusX: p.x += t; break;
      case Action::kMinusX: p.x -= t; break;
      case Action::kPlusY: p.y += t; break;
      case Action::kMinusY: p.y -= t; break;
      case Action::kPlusZ: p.z += t; break;
      case Action::kMinusZ: p.z -= t; break;
      case Action::kPlusYaw: p.yaw = wrap_angle(p.yaw + config_.rotation_step, 2.0 * kPi); break;
      case Action::kMinusYaw: p.yaw = wrap_angle(p.yaw - config_.rotation_step, 2.0 * kPi); break;
      case Action::kClose: break;
    }
    if (outside_unit(p.x) || outside_unit(p.y) || outside_unit(p.z)) {
      event = StepEvent::kNotExecuted;
    } else {
      // Drift from repeated steps may overshoot a wall by rounding error.
      p.x = std::clamp(p.x, 0.0, 1.0);
      p.y = std::clamp(p.y, 0.0, 1.0);
      p.z = std::clamp(p.z, 0.0, 1.0);
      next.gripper = p;
      if (!next.contact_rewarded && contact_check(next)) event = StepEvent::kContact;
    }
  }

  const RewardContext ctx{event, state.contact_rewarded};
  StepOutcome outcome{reward(ctx), false, event};
  if (outcome.reward == kRewardContact) next.contact_rewarded = true;
  if (next.step_count >= config_.max_steps) next.terminal = true;
  outcome.terminal = next.terminal;
  return {next, outcome};
}

tensornet::Tensor GraspWorld::motor_state(const WorldState& s) const {
  const double turn = 2.0 * kPi;
  double yaw01 = std::fmod(s.gripper.yaw, turn) / turn;
  if (yaw01 < 0.0) yaw01 += 1.0;
  if (yaw01 >= 1.0) yaw01 = 0.0;
  return tensornet::Tensor({kMotorSize}, {s.gripper.x, s.gripper.y, s.gripper.z, yaw01,
                                          current_aperture(s) / config_.open_aperture});
}

Observation GraspWorld::observe(const WorldState& s) const {
  return {render_overhead(s), render_wrist(s), motor_state(s)};
}

}  // namespace graspq::world
