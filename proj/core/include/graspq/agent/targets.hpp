#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspq/agent/policy.hpp"
#include "graspq/agent/replay.hpp"
#include "graspq/tensornet/graph.hpp"
#include "graspq/tensornet/ops.hpp"
#include "graspq/tensornet/optim.hpp"
#include "graspq/tensornet/param_set.hpp"

namespace graspq::agent {

/// A Q-network: maps a batch of inputs to Q-values [B, action_count()].
template <class M>
concept QModel = requires(const M& m, tensornet::Graph& g, tensornet::ParamSet& p, const tensornet::ParamSet& cp,
                          std::span<const typename M::Input* const> xs) {
  { m.action_count() } -> std::convertible_to<std::size_t>;
  { m.forward(g, p, xs, tensornet::Mode::kTrain) } -> std::same_as<tensornet::Var>;
  { m.forward(g, cp, xs) } -> std::same_as<tensornet::Var>;
};

/// Throws unless 0 <= gamma < 1.
void check_discount(double gamma);

/// r if terminal, else r + gamma * max_a q_next_target[a].
double dqn_target(double reward, bool terminal, std::span<const double> q_next_target, double gamma);

/// r if terminal, else r + gamma * q_next_target[argmax_a q_next_online[a]].
double ddqn_target(double reward, bool terminal, std::span<const double> q_next_online,
                   std::span<const double> q_next_target, double gamma);

/// Target copies online when step is a multiple of period. Returns whether it copied.
bool sync_target(const tensornet::ParamSet& online, tensornet::ParamSet& target, std::uint64_t step,
                 std::uint64_t period);

/// Inference-mode Q-values, row-major [inputs.size(), action_count].
template <QModel M>
std::vector<double> batch_q_values(const M& model, const tensornet::ParamSet& params,
                                   std::span<const typename M::Input* const> inputs) {
  if (inputs.empty()) return {};
  tensornet::Graph g;
  const tensornet::Tensor& q = g.value(model.forward(g, params, inputs));
  return {q.raw(), q.raw() + q.size()};
}

namespace detail {

template <class M>
std::vector<const typename M::Input*> bootstrap_inputs(std::span<const BasicTransition<typename M::Input>> batch) {
  std::vector<const typename M::Input*> next;
  for (const auto& t : batch) {
    if (t.terminal) continue;
    if (!t.next_obs) throw std::invalid_argument("non-terminal transition without a next observation");
    next.push_back(t.next_obs.get());
  }
  return next;
}

template <class M, class Fn>
std::vector<double> fill_targets(const M& model, std::span<const BasicTransition<typename M::Input>> batch, Fn&& row_target) {
  const std::size_t a = model.action_count();
  std::vector<double> out;
  out.reserve(batch.size());
  std::size_t row = 0;
  for (const auto& t : batch) {
    if (t.terminal) {
      out.push_back(t.reward);
    } else {
      out.push_back(row_target(t, row * a, a));
      ++row;
    }
  }
  return out;
}

}  // namespace detail

/// Bootstrap targets valued by the target network.
template <QModel M>
std::vector<double> dqn_targets(const M& model, std::span<const BasicTransition<typename M::Input>> batch,
                                const tensornet::ParamSet& target, double gamma) {
  check_discount(gamma);
  const auto next = detail::bootstrap_inputs<M>(batch);
  const auto q_target = batch_q_values(model, target, std::span<const typename M::Input* const>(next));
  return detail::fill_targets(model, batch, [&](const auto& t, std::size_t offset, std::size_t a) {
    return dqn_target(t.reward, false, std::span<const double>(q_target).subspan(offset, a), gamma);
  });
}

/// Bootstrap targets whose action is chosen by the online network and valued by the target network.
template <QModel M>
std::vector<double> ddqn_targets(const M& model, std::span<const BasicTransition<typename M::Input>> batch,
                                 const tensornet::ParamSet& online, const tensornet::ParamSet& target, double gamma) {
  check_discount(gamma);
  const auto next = detail::bootstrap_inputs<M>(batch);
  const std::span<const typename M::Input* const> inputs(next);
  const auto q_online = batch_q_values(model, online, inputs);
  const auto q_target = batch_q_values(model, target, inputs);
  return detail::fill_targets(model, batch, [&](const auto& t, std::size_t offset, std::size_t a) {
    return ddqn_target(t.reward, false, std::span<const double>(q_online).subspan(offset, a),
                       std::span<const double>(q_target).subspan(offset, a), gamma);
  });
}

/// Mean squared TD error of the taken actions, with gradients left in `online`.
/// Forward runs in train mode, so batchnorm running statistics advance.
template <QModel M>
double td_gradients(const M& model, tensornet::ParamSet& online,
                    std::span<const BasicTransition<typename M::Input>> batch, std::span<const double> targets) {
  if (batch.empty()) throw std::invalid_argument("TD update on an empty batch");
  if (targets.size() != batch.size()) {
    throw std::invalid_argument("TD update has " + std::to_string(batch.size()) + " transitions but " +
                                std::to_string(targets.size()) + " targets");
  }
  std::vector<const typename M::Input*> inputs;
  std::vector<std::size_t> actions;
  inputs.reserve(batch.size());
  actions.reserve(batch.size());
  for (const auto& t : batch) {
    if (!t.obs) throw std::invalid_argument("transition without an observation");
    inputs.push_back(t.obs.get());
    actions.push_back(t.action);
  }
  tensornet::Graph g;
  const auto q = model.forward(g, online, std::span<const typename M::Input* const>(inputs), tensornet::Mode::kTrain);
  const auto taken = tensornet::gather_columns(g, q, actions);
  const auto loss = tensornet::mse_loss(g, taken, tensornet::Tensor({targets.size()}, {targets.begin(), targets.end()}));
  g.backward(loss);
  return g.value(loss).item();
}

/// One optimizer step on the TD loss; returns the loss before the step.
template <QModel M>
double td_update(const M& model, tensornet::ParamSet& online,
                 std::span<const BasicTransition<typename M::Input>> batch, std::span<const double> targets,
                 const tensornet::Optimizer& optimizer) {
  const double loss = td_gradients(model, online, batch, targets);
  optimizer.step(online);
  return loss;
}

}  // namespace graspq::agent
