#include "graspq/agent/qtable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "graspq/agent/targets.hpp"

namespace graspq::agent {

namespace {

std::uint64_t bin(double v, double lo, double hi, int bins) {
  const double t = std::floor((v - lo) / (hi - lo) * bins);
  return static_cast<std::uint64_t>(std::clamp(t, 0.0, double(bins - 1)));
}

std::uint64_t yaw_bin(double yaw) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(yaw, two_pi);
  if (a < 0.0) a += two_pi;
  return bin(a, 0.0, two_pi, kYawBins);
}

}  // namespace

StateCode discretize(const world::WorldState& s) {
  const auto& g = s.gripper;
  const std::uint64_t digits[][2] = {
      {bin(g.x, 0.0, 1.0, kPositionBins), kPositionBins},
      {bin(g.y, 0.0, 1.0, kPositionBins), kPositionBins},
      {bin(g.z, 0.0, 1.0, kPositionBins), kPositionBins},
      {yaw_bin(g.yaw), kYawBins},
      {bin(s.object.x - g.x, -kOffsetRange, kOffsetRange, kPositionBins), kPositionBins},
      {bin(s.object.y - g.y, -kOffsetRange, kOffsetRange, kPositionBins), kPositionBins},
      {yaw_bin(s.object.yaw - g.yaw), kYawBins},
  };
  StateCode code = 0;
  for (const auto& [digit, radix] : digits) code = code * radix + digit;
  return code;
}

QRow QTable::values(StateCode code) const {
  const auto it = rows_.find(code);
  return it == rows_.end() ? QRow{} : it->second;
}

void qtable_update(QTable& table, StateCode code, std::size_t action, double reward, StateCode next_code,
                   bool terminal, double alpha, double gamma) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("learning rate alpha must be in (0, 1], got " + std::to_string(alpha));
  }
  const QRow next = table.values(next_code);
  const double target = dqn_target(reward, terminal, next, gamma);
  const double q = table.value(code, action);
  table.set(code, action, q + alpha * (target - q));
}

}  // namespace graspq::agent
