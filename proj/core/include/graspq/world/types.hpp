#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "graspq/tensornet/tensor.hpp"

namespace graspq::world {

enum class ObjectKind { kCube, kSphere, kCylinder };

inline constexpr std::array<ObjectKind, 3> kAllObjectKinds = {ObjectKind::kCube, ObjectKind::kSphere,
                                                               ObjectKind::kCylinder};

std::string_view to_string(ObjectKind kind);
std::optional<ObjectKind> parse_object_kind(std::string_view text);

/// Discrete end-effector command. Motion codes move by one step along an
/// axis; kClose closes the gripper and ends the episode.
enum class Action : std::uint8_t {
  kPlusX = 0,
  kMinusX,
  kPlusY,
  kMinusY,
  kPlusZ,
  kMinusZ,
  kPlusYaw,
  kMinusYaw,
  kClose,
};

inline constexpr std::size_t kActionCount = 9;

inline constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }
Action action_from_index(std::size_t index);
std::string_view to_string(Action a);

enum class StepEvent { kExecuted, kNotExecuted, kContact, kSuccess, kPartial, kFailure };

std::string_view to_string(StepEvent e);

struct GripperPose {
  double x = 0.5;
  double y = 0.5;
  double z = 0.25;
  double yaw = 0.0;  // radians, wrapped to [-pi, pi)

  friend bool operator==(const GripperPose&, const GripperPose&) = default;
};

struct ObjectPose {
  double x = 0.5;
  double y = 0.5;
  double yaw = 0.0;

  friend bool operator==(const ObjectPose&, const ObjectPose&) = default;
};

/// Full simulator ground truth.
struct WorldState {
  GripperPose gripper;
  bool gripper_open = true;
  ObjectKind object_kind = ObjectKind::kCube;
  ObjectPose object;
  bool object_held = false;
  int step_count = 0;
  // Episode bookkeeping: first-contact reward already paid, episode over.
  bool contact_rewarded = false;
  bool terminal = false;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

inline constexpr std::size_t kMotorSize = 5;

/// Camera images plus motor state. overhead is [4,H,W] (RGB + height),
/// wrist is [3,H,W] (RGB), motor is [5] = (x, y, z, yaw / 2pi, aperture / open aperture).
struct Observation {
  tensornet::Tensor overhead;
  tensornet::Tensor wrist;
  tensornet::Tensor motor;
};

struct StepOutcome {
  double reward = 0.0;
  bool terminal = false;
  StepEvent event = StepEvent::kExecuted;
};

}  // namespace graspq::world
