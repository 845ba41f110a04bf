#pragma once

#include <array>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "graspq/agent/replay.hpp"
#include "graspq/world/grasp_world.hpp"

namespace graspq::servo {

using ActionValues = std::array<double, world::kActionCount>;

enum class Outcome { kSuccess, kPartial, kFailure };

std::string_view to_string(Outcome outcome);

struct EpisodeResult {
  std::vector<agent::Transition> transitions;
  world::WorldState final_state;
  double total_return = 0.0;
  int steps = 0;
  Outcome outcome = Outcome::kFailure;
  double epsilon = 0.0;
};

/// Action values for the current state. Learned policies read the
/// observation; the tabular baseline reads the ground-truth state.
using QFunction = std::function<ActionValues(const world::WorldState&, const world::Observation&)>;

/// Called after every step with the recorded transition and the states around it.
using StepHook = std::function<void(const agent::Transition&, const world::WorldState& before,
                                    const world::WorldState& after)>;

/// Closed-loop episode: observe, score actions, pick epsilon-greedily, step.
/// Ends when the gripper closes, the world reports terminal, or after max_steps.
EpisodeResult run_episode(const world::GraspWorld& env, const world::ResetResult& start, const QFunction& q_fn,
                          double epsilon, std::mt19937_64& rng, int max_steps, const StepHook& hook = {});

}  // namespace graspq::servo
