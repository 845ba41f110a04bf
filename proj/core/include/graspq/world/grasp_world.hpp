#pragma once

#include <cstdint>
#include <numbers>

#include "graspq/tensornet/tensor.hpp"
#include "graspq/world/types.hpp"

namespace graspq::world {

inline constexpr double kRewardSuccess = 10.0;
inline constexpr double kRewardContact = 1.0;
inline constexpr double kRewardNotExecuted = -1.0;
inline constexpr double kRewardStep = -0.025;

struct WorldConfig {
  std::size_t image_size = 16;
  int supersample = 4;

  double translation_step = 0.05;
  double rotation_step = std::numbers::pi / 8.0;
  int max_steps = 50;

  GripperPose home{0.5, 0.5, 0.15, 0.0};
  double spawn_min = 0.4;
  double spawn_max = 0.6;

  double open_aperture = 0.12;
  double finger_thickness = 0.02;
  double finger_half_width = 0.025;

  /// Jaw tips must be at or below this height for a grasp to capture.
  double grasp_height = 0.1;
  /// Jaw tips at or below this height can touch the object.
  double contact_height = 0.1;
  double success_height = 0.6;

  /// Overhead camera footprint: the square [overhead_min, overhead_max]^2.
  double overhead_min = 0.1;
  double overhead_max = 0.9;
  /// Wrist camera footprint: gripper-centred square of this half extent.
  double wrist_half_extent = 0.125;
};

/// Shape, grasp tolerances and colour of one object kind.
struct ObjectGeometry {
  enum class Footprint { kBox, kDisk };
  Footprint footprint;
  double half_length;  // box: along the object's yaw axis; disk: radius
  double half_width;   // box: across the yaw axis
  double height;
  // Grasp capture, in the gripper frame: `across` is along the closing axis.
  double capture_across;
  double capture_along;
  bool radial_capture;  // disk capture of radius capture_across
  // Closing axis must sit at align_offset (mod align_period) from the object yaw.
  bool needs_alignment;
  double align_offset;
  double align_period;
  double align_tolerance;
  double color[3];
};

const ObjectGeometry& geometry(ObjectKind kind);

struct ResetResult {
  WorldState state;
  Observation observation;
};

struct StepResult {
  WorldState state;
  StepOutcome outcome;
};

/// Context needed to price one evaluated step.
struct RewardContext {
  StepEvent event = StepEvent::kExecuted;
  /// Whether the once-per-episode contact reward had already been paid before this step.
  bool contact_already_rewarded = false;
};

/// success +10, first contact +1, not executed -1, anything else -0.025.
double reward(const RewardContext& context);

/// Deterministic kinematic tabletop with one object and a parallel-jaw gripper.
/// All members are pure functions of their arguments.
class GraspWorld {
 public:
  GraspWorld() = default;
  explicit GraspWorld(WorldConfig config);

  const WorldConfig& config() const { return config_; }

  ResetResult reset(std::uint64_t seed, ObjectKind kind) const;
  WorldState initial_state(std::uint64_t seed, ObjectKind kind) const;
  StepResult step(const WorldState& state, Action action) const;

  Observation observe(const WorldState& state) const;
  tensornet::Tensor render_overhead(const WorldState& state) const;
  tensornet::Tensor render_wrist(const WorldState& state) const;
  tensornet::Tensor motor_state(const WorldState& state) const;

  /// Jaw region intersects the object footprint with the jaws low enough to touch it.
  bool contact_check(const WorldState& state) const;
  /// Object centred between the jaws, yaw aligned, jaws low and wide enough.
  bool capture_check(const WorldState& state) const;
  /// Holding the object at or above the success height.
  bool is_success(const WorldState& state) const;

  double current_aperture(const WorldState& state) const;

 private:
  WorldConfig config_;
};

/// Wraps an angle to [-period/2, period/2).
double wrap_angle(double angle, double period);

}  // namespace graspq::world
