#pragma once

#include <cstdint>
#include <span>

#include "graspq/tensornet/graph.hpp"
#include "graspq/tensornet/param_set.hpp"

namespace graspq::agent {

/// Q(s, .) = W[s, .] + b over a one-hot encoding of a small discrete state.
/// Exact on any tabular MDP, so DQN on it can be checked against value iteration.
class OneHotLinearModel {
 public:
  using Input = std::size_t;

  OneHotLinearModel(std::size_t states, std::size_t actions);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }

  tensornet::ParamSet build(std::uint64_t seed) const;

  tensornet::Var forward(tensornet::Graph& g, tensornet::ParamSet& params, std::span<const Input* const> batch,
                         tensornet::Mode mode) const;
  tensornet::Var forward(tensornet::Graph& g, const tensornet::ParamSet& params,
                         std::span<const Input* const> batch) const;

 private:
  tensornet::Tensor encode(std::span<const Input* const> batch) const;

  std::size_t states_;
  std::size_t actions_;
};

}  // namespace graspq::agent
