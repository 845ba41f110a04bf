#include "graspq/agent/linear_model.hpp"

#include <stdexcept>
#include <string>

#include "graspq/tensornet/ops.hpp"

namespace graspq::agent {

OneHotLinearModel::OneHotLinearModel(std::size_t states, std::size_t actions) : states_(states), actions_(actions) {
  if (states == 0 || actions == 0) throw std::invalid_argument("one-hot model needs states and actions");
}

tensornet::ParamSet OneHotLinearModel::build(std::uint64_t seed) const {
  return tensornet::init_params({tensornet::DenseSpec{"q", states_, actions_}}, seed);
}

tensornet::Tensor OneHotLinearModel::encode(std::span<const Input* const> batch) const {
  if (batch.empty()) throw std::invalid_argument("one-hot model forward on an empty batch");
  tensornet::Tensor x({batch.size(), states_});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t s = *batch[b];
    if (s >= states_) {
      throw std::invalid_argument("state " + std::to_string(s) + " out of range for " + std::to_string(states_) +
                                  " states");
    }
    x[b * states_ + s] = 1.0;
  }
  return x;
}

tensornet::Var OneHotLinearModel::forward(tensornet::Graph& g, tensornet::ParamSet& params,
                                          std::span<const Input* const> batch, tensornet::Mode) const {
  return tensornet::dense(g, g.constant(encode(batch)), g.parameter(params, "q.weight"),
                          g.parameter(params, "q.bias"));
}

tensornet::Var OneHotLinearModel::forward(tensornet::Graph& g, const tensornet::ParamSet& params,
                                          std::span<const Input* const> batch) const {
  return tensornet::dense(g, g.constant(encode(batch)), g.parameter(params, "q.weight"),
                          g.parameter(params, "q.bias"));
}

}  // namespace graspq::agent
