#include "graspq/agent/targets.hpp"

#include <algorithm>

namespace graspq::agent {

void check_discount(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("discount must be in [0, 1), got " + std::to_string(gamma));
  }
}

double dqn_target(double reward, bool terminal, std::span<const double> q_next_target, double gamma) {
  check_discount(gamma);
  if (terminal) return reward;
  if (q_next_target.empty()) throw std::invalid_argument("bootstrap target needs next-state Q-values");
  return reward + gamma * *std::max_element(q_next_target.begin(), q_next_target.end());
}

double ddqn_target(double reward, bool terminal, std::span<const double> q_next_online,
                   std::span<const double> q_next_target, double gamma) {
  check_discount(gamma);
  if (terminal) return reward;
  if (q_next_online.size() != q_next_target.size()) {
    throw std::invalid_argument("online and target Q-vectors differ in length");
  }
  return reward + gamma * q_next_target[argmax(q_next_online)];
}

bool sync_target(const tensornet::ParamSet& online, tensornet::ParamSet& target, std::uint64_t step,
                 std::uint64_t period) {
  if (period == 0) throw std::invalid_argument("target sync period must be at least 1");
  if (step % period != 0) return false;
  target = tensornet::copy_params(online);
  return true;
}

}  // namespace graspq::agent
