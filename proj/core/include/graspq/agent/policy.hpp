#pragma once

#include <cstddef>
#include <random>
#include <span>

namespace graspq::agent {

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Epsilon-greedy: uniform over all actions with probability epsilon, argmax otherwise.
std::size_t select_action(std::span<const double> q, double epsilon, std::mt19937_64& rng);

/// Linear decay from `start` to `end` over the first `decay_fraction` of
/// `episodes`, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  double decay_fraction = 0.4;

  double value(std::size_t episode, std::size_t episodes) const;

  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

}  // namespace graspq::agent
