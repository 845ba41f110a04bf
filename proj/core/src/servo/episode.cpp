#include "graspq/servo/episode.hpp"

#include <memory>
#include <stdexcept>

#include "graspq/agent/policy.hpp"

namespace graspq::servo {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess: return "success";
    case Outcome::kPartial: return "partial";
    case Outcome::kFailure: return "failure";
  }
  return "unknown";
}

EpisodeResult run_episode(const world::GraspWorld& env, const world::ResetResult& start, const QFunction& q_fn,
                          double epsilon, std::mt19937_64& rng, int max_steps, const StepHook& hook) {
  if (max_steps < 1) throw std::invalid_argument("episode max_steps must be at least 1");
  EpisodeResult result;
  result.epsilon = epsilon;
  world::WorldState state = start.state;
  auto obs = std::make_shared<const world::Observation>(start.observation);
  world::StepEvent last = world::StepEvent::kExecuted;
  while (!state.terminal && result.steps < max_steps) {
    const ActionValues q = q_fn(state, *obs);
    const std::size_t action = agent::select_action(q, epsilon, rng);
    world::StepResult next = env.step(state, world::action_from_index(action));
    auto next_obs = std::make_shared<const world::Observation>(env.observe(next.state));
    const agent::Transition& t = result.transitions.emplace_back(
        agent::Transition{obs, action, next.outcome.reward, next_obs, next.outcome.terminal});
    result.total_return += next.outcome.reward;
    ++result.steps;
    last = next.outcome.event;
    if (hook) hook(t, state, next.state);
    state = std::move(next.state);
    obs = std::move(next_obs);
  }
  result.final_state = state;
  result.outcome = last == world::StepEvent::kSuccess   ? Outcome::kSuccess
                   : last == world::StepEvent::kPartial ? Outcome::kPartial
                                                        : Outcome::kFailure;
  return result;
}

}  // namespace graspq::servo
