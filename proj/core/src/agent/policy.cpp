#include "graspq/agent/policy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace graspq::agent {

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::size_t select_action(std::span<const double> q, double epsilon, std::mt19937_64& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must be in [0, 1], got " + std::to_string(epsilon));
  }
  if (q.empty()) throw std::invalid_argument("select_action on an empty Q vector");
  // Draw the exploration coin even at epsilon 0 so the rng stream does not
  // depend on the schedule.
  const double coin = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (coin < epsilon) return std::uniform_int_distribution<std::size_t>(0, q.size() - 1)(rng);
  return argmax(q);
}

double EpsilonSchedule::value(std::size_t episode, std::size_t episodes) const {
  const double horizon = decay_fraction * static_cast<double>(episodes);
  if (horizon <= 0.0 || static_cast<double>(episode) >= horizon) return end;
  return start + (end - start) * static_cast<double>(episode) / horizon;
}

}  // namespace graspq::agent
