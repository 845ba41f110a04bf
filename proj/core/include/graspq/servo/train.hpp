#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "graspq/agent/policy.hpp"
#include "graspq/agent/qtable.hpp"
#include "graspq/gqn/gqn.hpp"
#include "graspq/servo/episode.hpp"
#include "graspq/tensornet/param_set.hpp"
#include "graspq/world/grasp_world.hpp"

namespace graspq::servo {

enum class Algorithm { kQLearning, kDqn, kDdqn };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view text);

struct TrainConfig {
  Algorithm algorithm = Algorithm::kDdqn;
  gqn::ViewMode view_mode = gqn::ViewMode::kMulti;
  /// Object for every episode; empty draws one uniformly per episode.
  std::optional<world::ObjectKind> object = world::ObjectKind::kCube;
  std::size_t episodes = 2000;
  int max_steps = 50;
  double gamma = 0.9;
  agent::EpsilonSchedule epsilon;
  std::size_t replay_capacity = 20000;
  std::size_t batch_size = 32;
  std::uint64_t target_sync = 200;
  double learning_rate = 1e-4;
  double alpha = 0.1;
  /// Transitions collected before the first network update.
  std::size_t warmup = 500;
  /// Environment steps between network updates.
  std::size_t update_every = 4;
  std::size_t image_size = 16;
  bool learning = true;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;
  world::WorldConfig world_config() const;
  gqn::GqnConfig network_config() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainLogRow {
  std::size_t episode = 0;
  double total_return = 0.0;
  int steps = 0;
  bool success = false;
  double epsilon = 0.0;
  /// Mean TD loss of the updates made during the episode; 0 when none.
  double loss = 0.0;

  friend bool operator==(const TrainLogRow&, const TrainLogRow&) = default;
};

using TrainLog = std::vector<TrainLogRow>;

struct TrainResult {
  TrainLog log;
  /// Online network after the last episode (empty for tabular runs).
  tensornet::ParamSet params;
  agent::QTable table;
  std::uint64_t env_steps = 0;
  std::uint64_t updates = 0;
};

using EpisodeCallback = std::function<void(const TrainLogRow&)>;

/// Runs the configured number of training episodes. Deterministic in the config.
TrainResult train(const TrainConfig& config, const EpisodeCallback& on_episode = {});

struct EvalResult {
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  double mean_return = 0.0;
};

/// Greedy rollouts of a trained network on one object kind.
EvalResult evaluate(const gqn::GraspQNetwork& net, const tensornet::ParamSet& params, const world::GraspWorld& env,
                    world::ObjectKind kind, std::size_t episodes, std::uint64_t seed);
/// Greedy rollouts of a tabular policy.
EvalResult evaluate(const agent::QTable& table, const world::GraspWorld& env, world::ObjectKind kind,
                    std::size_t episodes, std::uint64_t seed);

/// Independent random streams derived from one master seed.
enum class SeedStream : std::uint64_t {
  kInit = 1,     // network initialisation
  kPolicy = 2,   // epsilon-greedy draws
  kReplay = 3,   // minibatch sampling
  kEpisode = 4,  // per-episode object placement
  kObject = 5,   // per-episode object kind when training on all kinds
  kEval = 6,     // evaluation placements
};

/// splitmix64(splitmix64(master ^ splitmix64(stream)) + index).
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index = 0);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace graspq::servo
