#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <utility>

#include "chain_learners.hpp"
#include "graspq/agent/linear_model.hpp"
#include "graspq/agent/policy.hpp"
#include "graspq/agent/qtable.hpp"
#include "graspq/agent/replay.hpp"
#include "graspq/agent/targets.hpp"
#include "graspq/tensornet/optim.hpp"
#include "graspq/world/grasp_world.hpp"
#include "scripted_oracle.hpp"
#include "stats.hpp"

namespace graspq::agent {
namespace {

using tensornet::ParamSet;
using testing::ChainMdp;
using IndexTransition = BasicTransition<std::size_t>;

IndexTransition make(std::size_t s, std::size_t a, double r, std::optional<std::size_t> next) {
  return {std::make_shared<const std::size_t>(s), a, r,
          next ? std::make_shared<const std::size_t>(*next) : nullptr, !next.has_value()};
}

TEST(Replay, OverwritesOldestFirst) {
  ReplayBuffer<int> buf(2);
  buf.push(1);
  buf.push(2);
  buf.push(3);
  ASSERT_EQ(buf.size(), 2u);
  EXPECT_EQ(buf[0], 2);
  EXPECT_EQ(buf[1], 3);
  EXPECT_THROW(buf[2], std::out_of_range);
}

TEST(Replay, SizeTracksPushesBelowCapacity) {
  ReplayBuffer<int> buf(10);
  for (int k = 1; k <= 7; ++k) {
    buf.push(k);
    EXPECT_EQ(buf.size(), std::size_t(k));
  }
}

TEST(Replay, CountsEveryInsertion) {
  ReplayBuffer<int> buf(10000);
  for (int k = 0; k < 100000; ++k) buf.push(k);
  EXPECT_EQ(buf.total_pushed(), 100000u);
  EXPECT_EQ(buf.size(), 10000u);
  EXPECT_EQ(buf[0], 90000);
  EXPECT_EQ(buf[9999], 99999);
}

TEST(Replay, ZeroCapacityAndEmptySampleAreErrors) {
  EXPECT_THROW(ReplayBuffer<int>(0), std::invalid_argument);
  ReplayBuffer<int> buf(3);
  std::mt19937_64 rng(1);
  EXPECT_THROW(buf.sample(1, rng), std::logic_error);
}

TEST(Replay, SingleItemRepeats) {
  ReplayBuffer<int> buf(4);
  buf.push(42);
  std::mt19937_64 rng(5);
  const auto batch = buf.sample(6, rng);
  EXPECT_EQ(batch, std::vector<int>(6, 42));
}

TEST(Replay, SameSeedSameSample) {
  ReplayBuffer<int> buf(50);
  for (int k = 0; k < 50; ++k) buf.push(k);
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(buf.sample(32, a), buf.sample(32, b));
}

TEST(Replay, SamplingIsUniform) {
  ReplayBuffer<int> buf(10);
  for (int k = 0; k < 10; ++k) buf.push(k);
  std::mt19937_64 rng(17);
  std::array<std::size_t, 10> counts{};
  for (int v : buf.sample(100000, rng)) ++counts[v];
  EXPECT_GT(testing::chi_square_uniform(counts).p_value, 0.01);
}

TEST(Policy, GreedyPicksLargest) {
  std::mt19937_64 rng(1);
  const std::array<double, 9> q = {0, 0, 0, 0, 0, 0, 0, 0, 5};
  EXPECT_EQ(select_action(q, 0.0, rng), 8u);
}

TEST(Policy, TiesGoToLowestIndex) {
  std::mt19937_64 rng(1);
  const std::array<double, 9> q = {0, 0, 3, 0, 0, 0, 3, 0, 0};
  EXPECT_EQ(select_action(q, 0.0, rng), 2u);
  EXPECT_EQ(argmax(q), 2u);
}

TEST(Policy, FullExplorationIsUniform) {
  std::mt19937_64 rng(23);
  const std::array<double, 9> q = {0, 0, 0, 0, 9, 0, 0, 0, 0};
  std::array<std::size_t, 9> counts{};
  for (int i = 0; i < 100000; ++i) ++counts[select_action(q, 1.0, rng)];
  EXPECT_GT(testing::chi_square_uniform(counts).p_value, 0.01);
}

TEST(Policy, ExplorationRateMatchesEpsilon) {
  std::mt19937_64 rng(29);
  const std::array<double, 9> q = {0, 0, 0, 0, 9, 0, 0, 0, 0};
  int off = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) off += select_action(q, 0.3, rng) != 4;
  // Off-greedy probability is eps * 8/9.
  const double p = 0.3 * 8.0 / 9.0;
  EXPECT_NEAR(double(off) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Policy, RejectsEpsilonOutsideUnitInterval) {
  std::mt19937_64 rng(1);
  const std::array<double, 9> q{};
  EXPECT_THROW(select_action(q, -0.1, rng), std::invalid_argument);
  EXPECT_THROW(select_action(q, 1.1, rng), std::invalid_argument);
}

TEST(EpsilonSchedule, LinearThenConstant) {
  const EpsilonSchedule s;
  EXPECT_DOUBLE_EQ(s.value(0, 1000), 1.0);
  EXPECT_DOUBLE_EQ(s.value(200, 1000), 0.55);
  EXPECT_DOUBLE_EQ(s.value(400, 1000), 0.1);
  EXPECT_DOUBLE_EQ(s.value(999, 1000), 0.1);
  double prev = 2.0;
  for (std::size_t e = 0; e < 1000; ++e) {
    EXPECT_LE(s.value(e, 1000), prev);
    prev = s.value(e, 1000);
  }
}

TEST(Targets, DqnHandExample) {
  const std::array<double, 3> q = {1, 3, 2};
  EXPECT_DOUBLE_EQ(dqn_target(-0.025, false, q, 0.9), 2.675);
}

TEST(Targets, DdqnHandExample) {
  const std::array<double, 3> online = {0, 7, 1};
  const std::array<double, 3> target = {5, 0, 9};
  EXPECT_EQ(ddqn_target(0.0, false, online, target, 0.5), 0.0);
}

TEST(Targets, TerminalReturnsRewardOnly) {
  const std::array<double, 3> q = {100, 200, 300};
  EXPECT_EQ(dqn_target(10.0, true, q, 0.9), 10.0);
  EXPECT_EQ(ddqn_target(10.0, true, q, q, 0.9), 10.0);
}

TEST(Targets, ZeroDiscountReturnsReward) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    std::array<double, 9> a, b;
    for (double& v : a) v = n(rng);
    for (double& v : b) v = n(rng);
    const double r = n(rng);
    EXPECT_EQ(dqn_target(r, false, a, 0.0), r);
    EXPECT_EQ(ddqn_target(r, false, a, b, 0.0), r);
  }
}

TEST(Targets, DiscountMustBeBelowOne) {
  const std::array<double, 2> q = {0, 1};
  EXPECT_THROW(dqn_target(0, false, q, 1.0), std::invalid_argument);
  EXPECT_THROW(ddqn_target(0, false, q, q, -0.1), std::invalid_argument);
  EXPECT_NO_THROW(dqn_target(0, false, q, 0.0));
}

// Property: both targets stay within r +- gamma * max|Q| of the target network.
TEST(Targets, BoundedByDiscountedMaxMagnitude) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 4.0);
  std::uniform_real_distribution<double> gam(0.0, 0.999);
  for (int i = 0; i < 10000; ++i) {
    std::array<double, 9> on, tg;
    for (double& v : on) v = n(rng);
    for (double& v : tg) v = n(rng);
    const double r = n(rng), g = gam(rng);
    double m = 0.0;
    for (double v : tg) m = std::max(m, std::abs(v));
    for (double y : {dqn_target(r, false, tg, g), ddqn_target(r, false, on, tg, g)}) {
      ASSERT_LE(std::abs(y - r), g * m + 1e-12);
    }
    ASSERT_GE(dqn_target(r, false, tg, g), ddqn_target(r, false, on, tg, g));
  }
}

TEST(Targets, BatchDdqnEqualsDqnForIdenticalNetworks) {
  const OneHotLinearModel model(4, 9);
  const ParamSet online = model.build(3);
  const ParamSet target = tensornet::copy_params(online);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> s(0, 3), a(0, 8);
  std::bernoulli_distribution term(0.2);
  std::vector<IndexTransition> batch;
  for (int i = 0; i < 200; ++i) {
    const double r = std::array<double, 4>{10.0, 1.0, -1.0, -0.025}[i % 4];
    batch.push_back(make(s(rng), a(rng), r, term(rng) ? std::nullopt : std::optional(s(rng))));
  }
  const std::span<const IndexTransition> view(batch);
  for (double g : {0.0, 0.5, 0.9, 0.99}) {
    const auto d = dqn_targets(model, view, target, g);
    const auto dd = ddqn_targets(model, view, online, target, g);
    ASSERT_EQ(d.size(), batch.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_EQ(d[i], dd[i]);
      if (batch[i].terminal) EXPECT_EQ(d[i], batch[i].reward);
    }
  }
}

TEST(Targets, BatchTargetsMatchHandComputation) {
  const OneHotLinearModel model(2, 3);
  ParamSet target = model.build(0);
  ParamSet online = model.build(0);
  // Rows are states: Q(1, .) = [1, 3, 2] on the target, argmax 0 on the online net.
  target.value("q.weight") = tensornet::Tensor({2, 3}, {0, 0, 0, 1, 3, 2});
  online.value("q.weight") = tensornet::Tensor({2, 3}, {0, 0, 0, 9, 1, 1});
  const std::vector<IndexTransition> batch = {make(0, 1, -0.025, 1), make(0, 2, 10.0, std::nullopt)};
  const std::span<const IndexTransition> view(batch);
  const auto d = dqn_targets(model, view, target, 0.9);
  EXPECT_DOUBLE_EQ(d[0], 2.675);
  EXPECT_EQ(d[1], 10.0);
  const auto dd = ddqn_targets(model, view, online, target, 0.9);
  EXPECT_DOUBLE_EQ(dd[0], -0.025 + 0.9 * 1.0);
  EXPECT_EQ(dd[1], 10.0);
}

TEST(TdUpdate, ExactTargetsGiveZeroLossAndNoChange) {
  const OneHotLinearModel model(3, 9);
  ParamSet p = model.build(1);
  const std::vector<IndexTransition> batch = {make(0, 4, 0, 1), make(2, 7, 0, std::nullopt)};
  std::vector<double> targets;
  for (const auto& t : batch) {
    const std::size_t* in[] = {t.obs.get()};
    targets.push_back(batch_q_values(model, p, std::span<const std::size_t* const>(in))[t.action]);
  }
  const ParamSet before = tensornet::copy_params(p);
  const double loss = td_update(model, p, std::span<const IndexTransition>(batch), targets,
                                tensornet::Optimizer{tensornet::OptimizerKind::kSgd, 0.1});
  EXPECT_EQ(loss, 0.0);
  EXPECT_EQ(before.value("q.weight").data()[0], p.value("q.weight").data()[0]);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto a = before.entry(i).value.data();
    const auto b = std::as_const(p).entry(i).value.data();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(TdUpdate, LossDecreasesOnFixedBatch) {
  const OneHotLinearModel model(4, 9);
  ParamSet p = model.build(2);
  std::vector<IndexTransition> batch;
  std::vector<double> targets;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> s(0, 3), a(0, 8);
  for (int i = 0; i < 16; ++i) {
    batch.push_back(make(s(rng), a(rng), 0.0, std::nullopt));
    targets.push_back(double(i % 5) - 2.0);
  }
  const tensornet::Optimizer adam{tensornet::OptimizerKind::kAdam, 0.05};
  const std::span<const IndexTransition> view(batch);
  const double first = td_update(model, p, view, targets, adam);
  double last = first;
  for (int i = 0; i < 99; ++i) last = td_update(model, p, view, targets, adam);
  EXPECT_LT(last, 0.5 * first);
}

TEST(TdUpdate, GradientOnlyReachesTakenActionColumn) {
  const OneHotLinearModel model(3, 9);
  ParamSet p = model.build(4);
  const std::vector<IndexTransition> batch = {make(1, 5, 0, std::nullopt)};
  const std::vector<double> targets = {3.0};
  td_gradients(model, p, std::span<const IndexTransition>(batch), targets);
  const auto& gw = p.grad("q.weight");
  const auto& gb = p.grad("q.bias");
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 9; ++a) {
      if (s == 1 && a == 5) {
        EXPECT_NE(gw[s * 9 + a], 0.0);
      } else {
        EXPECT_EQ(gw[s * 9 + a], 0.0);
      }
    }
  }
  for (std::size_t a = 0; a < 9; ++a) EXPECT_EQ(gb[a] != 0.0, a == 5);
}

TEST(TdUpdate, MismatchedTargetsAreRejected) {
  const OneHotLinearModel model(2, 9);
  ParamSet p = model.build(0);
  const std::vector<IndexTransition> batch = {make(0, 0, 0, std::nullopt)};
  const std::vector<double> none;
  const std::vector<double> two = {1, 2};
  EXPECT_THROW(td_gradients(model, p, std::span<const IndexTransition>(batch), two), std::invalid_argument);
  EXPECT_THROW(td_gradients(model, p, std::span<const IndexTransition>(), none), std::invalid_argument);
}

TEST(SyncTarget, CopiesOnMultiplesOfPeriod) {
  const OneHotLinearModel model(2, 9);
  ParamSet online = model.build(1);
  ParamSet target = model.build(2);
  EXPECT_TRUE(sync_target(online, target, 200, 200));
  EXPECT_TRUE(target == online);
  online.value("q.weight")[0] += 1.0;
  EXPECT_FALSE(sync_target(online, target, 201, 200));
  EXPECT_FALSE(target == online);
}

TEST(SyncTarget, PeriodOneAlwaysCopies) {
  const OneHotLinearModel model(2, 9);
  ParamSet online = model.build(1);
  ParamSet target = model.build(2);
  for (std::uint64_t step = 1; step < 20; ++step) {
    online.value("q.bias")[step % 9] += 0.1;
    sync_target(online, target, step, 1);
    EXPECT_TRUE(target == online);
  }
  EXPECT_THROW(sync_target(online, target, 1, 0), std::invalid_argument);
}

TEST(QTable, UnseenStatesReadZero) {
  const QTable t;
  for (double v : t.values(12345)) EXPECT_EQ(v, 0.0);
}

TEST(QTable, FreshUpdateHandValue) {
  QTable t;
  qtable_update(t, 7, 3, 1.0, 8, false, 0.5, 0.0);
  EXPECT_EQ(t.value(7, 3), 0.5);
}

TEST(QTable, FixedPointIsUnchanged) {
  QTable t;
  t.set(2, 1, 4.0);
  t.set(1, 0, 5.0);
  // 0.5 + 0.7 * 5 = 4.
  qtable_update(t, 2, 1, 0.5, 1, false, 0.3, 0.7);
  EXPECT_EQ(t.value(2, 1), 4.0);
  t.set(3, 0, 10.0);
  qtable_update(t, 3, 0, 10.0, 99, true, 0.9, 0.9);
  EXPECT_EQ(t.value(3, 0), 10.0);
}

TEST(QTable, RejectsBadStepSize) {
  QTable t;
  EXPECT_THROW(qtable_update(t, 0, 0, 1, 1, false, 0.0, 0.9), std::invalid_argument);
  EXPECT_THROW(qtable_update(t, 0, 0, 1, 1, false, 1.5, 0.9), std::invalid_argument);
}

TEST(QTable, ChainConvergesToValueIteration) {
  const auto q = testing::tabular_chain_q(0.9, 0.1, 10000);
  EXPECT_LT(testing::max_abs_diff(q, ChainMdp::optimal_q(0.9)), 1e-3);
}

TEST(ChainMdp, OptimalValuesByHand) {
  const auto q = ChainMdp::optimal_q(0.9);
  EXPECT_DOUBLE_EQ(q[3][1], 1.0);
  EXPECT_DOUBLE_EQ(q[2][1], -0.05 + 0.9);
  EXPECT_DOUBLE_EQ(q[0][0], 0.2);
}

TEST(LinearDqn, ChainConvergesToValueIteration) {
  const auto q = testing::linear_dqn_chain_q(0.9, 3000, 50, 2.0, 1);
  EXPECT_LT(testing::max_abs_diff(q, ChainMdp::optimal_q(0.9)), 1e-2);
}

TEST(LinearModel, RejectsOutOfRangeState) {
  const OneHotLinearModel model(3, 9);
  const ParamSet p = model.build(0);
  const std::size_t bad = 3;
  const std::size_t* in[] = {&bad};
  EXPECT_THROW(batch_q_values(model, p, std::span<const std::size_t* const>(in)), std::invalid_argument);
}

TEST(Overestimation, DqnBiasExceedsDdqnBias) {
  const auto samples = testing::overestimation_probe(2000, 1.0, 0.9, 5);
  std::vector<double> diff;
  for (const auto& s : samples) diff.push_back(s.dqn - s.ddqn);
  EXPECT_GT(testing::mean_lower_bound(diff, 0.95), 0.0);
}

TEST(Discretize, CodesSeparateBinsAndIgnoreSubBinMotion) {
  const world::GraspWorld env;
  world::WorldState s = env.initial_state(1, world::ObjectKind::kCube);
  const StateCode base = discretize(s);
  world::WorldState moved = env.step(s, world::Action::kPlusX).state;
  moved.step_count = 0;
  EXPECT_NE(discretize(moved), base);
  world::WorldState nudged = s;
  nudged.gripper.x += 1e-6;
  // Still the same x bin unless the nudge crosses a boundary.
  if (std::floor(s.gripper.x * 10) == std::floor(nudged.gripper.x * 10)) {
    EXPECT_EQ(discretize(nudged), base);
  }
  // Two rotation steps span one full yaw bin.
  world::WorldState turned = env.step(env.step(s, world::Action::kPlusYaw).state, world::Action::kPlusYaw).state;
  EXPECT_NE(discretize(turned), base);
}

}  // namespace
}  // namespace graspq::agent
