#include "graspq/servo/train.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "graspq/agent/targets.hpp"
#include "graspq/tensornet/optim.hpp"

namespace graspq::servo {

namespace {

void require(bool ok, const char* field, const std::string& rule) {
  if (!ok) throw std::invalid_argument(std::string(field) + " " + rule);
}

EvalResult greedy_rollouts(const world::GraspWorld& env, world::ObjectKind kind, std::size_t episodes,
                           std::uint64_t seed, const QFunction& q_fn) {
  if (episodes == 0) throw std::invalid_argument("evaluation needs at least one episode");
  EvalResult out;
  out.episodes = episodes;
  std::mt19937_64 rng(derive_seed(seed, SeedStream::kPolicy));
  std::size_t successes = 0;
  double steps = 0.0, returns = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto start = env.reset(derive_seed(seed, SeedStream::kEval, e), kind);
    const auto r = run_episode(env, start, q_fn, 0.0, rng, env.config().max_steps);
    successes += r.outcome == Outcome::kSuccess;
    steps += r.steps;
    returns += r.total_return;
  }
  const double n = static_cast<double>(episodes);
  out.success_rate = static_cast<double>(successes) / n;
  out.mean_steps = steps / n;
  out.mean_return = returns / n;
  return out;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kQLearning: return "qlearn";
    case Algorithm::kDqn: return "dqn";
    case Algorithm::kDdqn: return "ddqn";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  for (Algorithm a : {Algorithm::kQLearning, Algorithm::kDqn, Algorithm::kDdqn}) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

void TrainConfig::validate() const {
  require(episodes >= 1, "episodes", "must be at least 1");
  require(max_steps >= 1, "max_steps", "must be at least 1");
  require(gamma >= 0.0 && gamma < 1.0, "gamma", "must be in [0, 1)");
  require(epsilon.start >= 0.0 && epsilon.start <= 1.0, "epsilon_start", "must be in [0, 1]");
  require(epsilon.end >= 0.0 && epsilon.end <= 1.0, "epsilon_end", "must be in [0, 1]");
  require(epsilon.decay_fraction >= 0.0 && epsilon.decay_fraction <= 1.0, "epsilon_decay_fraction",
          "must be in [0, 1]");
  require(replay_capacity >= 1, "replay_capacity", "must be at least 1");
  require(batch_size >= 1, "batch_size", "must be at least 1");
  require(target_sync >= 1, "target_sync", "must be at least 1");
  require(learning_rate > 0.0, "learning_rate", "must be positive");
  require(alpha > 0.0 && alpha <= 1.0, "alpha", "must be in (0, 1]");
  require(update_every >= 1, "update_every", "must be at least 1");
  require(image_size >= 4, "image_size", "must be at least 4");
}

world::WorldConfig TrainConfig::world_config() const {
  world::WorldConfig w;
  w.image_size = image_size;
  w.max_steps = max_steps;
  return w;
}

gqn::GqnConfig TrainConfig::network_config() const {
  gqn::GqnConfig n;
  n.view_mode = view_mode;
  n.image_size = image_size;
  return n;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

TrainResult train(const TrainConfig& config, const EpisodeCallback& on_episode) {
  config.validate();
  const world::GraspWorld env(config.world_config());
  const bool tabular = config.algorithm == Algorithm::kQLearning;
  const gqn::GraspQNetwork net(config.network_config());

  TrainResult result;
  tensornet::ParamSet& online = result.params;
  tensornet::ParamSet target;
  if (!tabular) {
    online = net.build(derive_seed(config.seed, SeedStream::kInit));
    target = tensornet::copy_params(online);
  }
  const tensornet::Optimizer optimizer{tensornet::OptimizerKind::kAdam, config.learning_rate};
  agent::ReplayBuffer<agent::Transition> replay(config.replay_capacity);
  std::mt19937_64 policy_rng(derive_seed(config.seed, SeedStream::kPolicy));
  std::mt19937_64 replay_rng(derive_seed(config.seed, SeedStream::kReplay));

  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  QFunction q_fn;
  StepHook hook;
  if (tabular) {
    q_fn = [&](const world::WorldState& s, const world::Observation&) {
      return result.table.values(agent::discretize(s));
    };
    hook = [&](const agent::Transition& t, const world::WorldState& before, const world::WorldState& after) {
      ++result.env_steps;
      if (!config.learning) return;
      agent::qtable_update(result.table, agent::discretize(before), t.action, t.reward, agent::discretize(after),
                           t.terminal, config.alpha, config.gamma);
      ++result.updates;
    };
  } else {
    q_fn = [&](const world::WorldState&, const world::Observation& obs) {
      return gqn::q_values(net, std::as_const(online), obs);
    };
    hook = [&](const agent::Transition& t, const world::WorldState&, const world::WorldState&) {
      ++result.env_steps;
      if (!config.learning) return;
      replay.push(t);
      if (replay.size() >= config.warmup && result.env_steps % config.update_every == 0) {
        const auto batch = replay.sample(config.batch_size, replay_rng);
        const std::span<const agent::Transition> view(batch);
        const auto targets = config.algorithm == Algorithm::kDdqn
                                 ? agent::ddqn_targets(net, view, online, target, config.gamma)
                                 : agent::dqn_targets(net, view, target, config.gamma);
        loss_sum += agent::td_update(net, online, view, targets, optimizer);
        ++loss_count;
        ++result.updates;
      }
      agent::sync_target(online, target, result.env_steps, config.target_sync);
    };
  }

  result.log.reserve(config.episodes);
  for (std::size_t e = 0; e < config.episodes; ++e) {
    const double eps = config.epsilon.value(e, config.episodes);
    const world::ObjectKind kind =
        config.object ? *config.object
                      : world::kAllObjectKinds[derive_seed(config.seed, SeedStream::kObject, e) %
                                               world::kAllObjectKinds.size()];
    const auto start = env.reset(derive_seed(config.seed, SeedStream::kEpisode, e), kind);
    loss_sum = 0.0;
    loss_count = 0;
    const EpisodeResult ep = run_episode(env, start, q_fn, eps, policy_rng, config.max_steps, hook);
    TrainLogRow row{e, ep.total_return, ep.steps, ep.outcome == Outcome::kSuccess, eps,
                    loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0};
    result.log.push_back(row);
    if (on_episode) on_episode(row);
  }
  return result;
}

EvalResult evaluate(const gqn::GraspQNetwork& net, const tensornet::ParamSet& params, const world::GraspWorld& env,
                    world::ObjectKind kind, std::size_t episodes, std::uint64_t seed) {
  net.validate(params);
  return greedy_rollouts(env, kind, episodes, seed, [&](const world::WorldState&, const world::Observation& obs) {
    return gqn::q_values(net, params, obs);
  });
}

EvalResult evaluate(const agent::QTable& table, const world::GraspWorld& env, world::ObjectKind kind,
                    std::size_t episodes, std::uint64_t seed) {
  return greedy_rollouts(env, kind, episodes, seed, [&](const world::WorldState& s, const world::Observation&) {
    return table.values(agent::discretize(s));
  });
}

}  // namespace graspq::servo
