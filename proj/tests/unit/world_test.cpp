#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "graspq/world/grasp_world.hpp"
#include "scripted_oracle.hpp"

namespace graspq::world {
namespace {

constexpr double kPi = std::numbers::pi;

WorldState pose_state(double x, double y, double z, double yaw = 0.0) {
  WorldState s;
  s.gripper = {x, y, z, yaw};
  return s;
}

std::vector<double> values(const tensornet::Tensor& t) { return {t.data().begin(), t.data().end()}; }

// Weighted centroid (col, row) of an image plane; weights clipped at zero.
template <class WeightFn>
std::pair<double, double> centroid(std::size_t size, WeightFn&& weight) {
  double sw = 0.0, sc = 0.0, sr = 0.0;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double w = std::max(0.0, weight(r, c));
      sw += w;
      sc += w * double(c);
      sr += w * double(r);
    }
  }
  return {sc / sw, sr / sw};
}

TEST(Reset, SameSeedAndKindGiveIdenticalState) {
  const GraspWorld env;
  for (ObjectKind k : kAllObjectKinds) {
    const ResetResult a = env.reset(42, k);
    const ResetResult b = env.reset(42, k);
    EXPECT_EQ(a.state, b.state);
    EXPECT_EQ(values(a.observation.overhead), values(b.observation.overhead));
    EXPECT_EQ(values(a.observation.wrist), values(b.observation.wrist));
  }
  EXPECT_NE(env.reset(1, ObjectKind::kCube).state, env.reset(2, ObjectKind::kCube).state);
}

TEST(Reset, GripperHomeOpenAndFreshCounters) {
  const GraspWorld env;
  const WorldState s = env.initial_state(7, ObjectKind::kSphere);
  EXPECT_EQ(s.gripper.x, env.config().home.x);
  EXPECT_EQ(s.gripper.z, env.config().home.z);
  EXPECT_TRUE(s.gripper_open);
  EXPECT_FALSE(s.object_held);
  EXPECT_EQ(s.step_count, 0);
  EXPECT_FALSE(s.terminal);
  EXPECT_EQ(s.object_kind, ObjectKind::kSphere);
}

TEST(Reset, ObjectPositionsStayInsideSpawnRegion) {
  const GraspWorld env;
  const auto& cfg = env.config();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const WorldState s = env.initial_state(seed, ObjectKind::kCube);
    ASSERT_GE(s.object.x, cfg.spawn_min);
    ASSERT_LE(s.object.x, cfg.spawn_max);
    ASSERT_GE(s.object.y, cfg.spawn_min);
    ASSERT_LE(s.object.y, cfg.spawn_max);
    ASSERT_GE(s.object.yaw, -kPi);
    ASSERT_LE(s.object.yaw, kPi);
  }
}

TEST(Reset, MeanPositionNearRegionCentroid) {
  const GraspWorld env;
  const auto& cfg = env.config();
  const double centre = 0.5 * (cfg.spawn_min + cfg.spawn_max);
  const double sigma = (cfg.spawn_max - cfg.spawn_min) / std::sqrt(12.0);
  const int n = 1000;
  double mx = 0.0, my = 0.0;
  for (int seed = 0; seed < n; ++seed) {
    const WorldState s = env.initial_state(seed, ObjectKind::kCube);
    mx += s.object.x / n;
    my += s.object.y / n;
  }
  EXPECT_NEAR(mx, centre, 3.0 * sigma / std::sqrt(double(n)));
  EXPECT_NEAR(my, centre, 3.0 * sigma / std::sqrt(double(n)));
}

TEST(Step, PlusXMovesByOneStep) {
  const GraspWorld env;
  const StepResult r = env.step(pose_state(0.5, 0.5, 0.5), Action::kPlusX);
  EXPECT_DOUBLE_EQ(r.state.gripper.x, 0.55);
  EXPECT_EQ(r.state.gripper.y, 0.5);
  EXPECT_EQ(r.state.gripper.z, 0.5);
  EXPECT_EQ(r.state.step_count, 1);
  EXPECT_EQ(r.outcome.event, StepEvent::kExecuted);
  EXPECT_EQ(r.outcome.reward, -0.025);
}

TEST(Step, EveryMotionMovesItsOwnAxis) {
  const GraspWorld env;
  const WorldState s = pose_state(0.5, 0.5, 0.5);
  const double t = env.config().translation_step, q = env.config().rotation_step;
  EXPECT_DOUBLE_EQ(env.step(s, Action::kMinusX).state.gripper.x, 0.5 - t);
  EXPECT_DOUBLE_EQ(env.step(s, Action::kPlusY).state.gripper.y, 0.5 + t);
  EXPECT_DOUBLE_EQ(env.step(s, Action::kMinusY).state.gripper.y, 0.5 - t);
  EXPECT_DOUBLE_EQ(env.step(s, Action::kPlusZ).state.gripper.z, 0.5 + t);
  EXPECT_DOUBLE_EQ(env.step(s, Action::kMinusZ).state.gripper.z, 0.5 - t);
  EXPECT_DOUBLE_EQ(env.step(s, Action::kPlusYaw).state.gripper.yaw, q);
  EXPECT_DOUBLE_EQ(env.step(s, Action::kMinusYaw).state.gripper.yaw, -q);
}

TEST(Step, YawWrapsIntoHalfOpenRange) {
  const GraspWorld env;
  WorldState s = pose_state(0.5, 0.5, 0.5, 0.0);
  for (int i = 0; i < 16; ++i) {
    s = env.step(s, Action::kPlusYaw).state;
    s.step_count = 0;
    ASSERT_GE(s.gripper.yaw, -kPi);
    ASSERT_LT(s.gripper.yaw, kPi);
  }
  EXPECT_NEAR(s.gripper.yaw, 0.0, 1e-12);
}

TEST(Step, MoveOutsideWorkspaceIsNotExecuted) {
  const GraspWorld env;
  const WorldState s = pose_state(1.0, 0.5, 0.5);
  const StepResult r = env.step(s, Action::kPlusX);
  EXPECT_EQ(r.state.gripper.x, 1.0);
  EXPECT_EQ(r.state.gripper.y, s.gripper.y);
  EXPECT_EQ(r.state.gripper.z, s.gripper.z);
  EXPECT_EQ(r.outcome.event, StepEvent::kNotExecuted);
  EXPECT_EQ(r.outcome.reward, -1.0);
  // A refused move still consumes a step.
  EXPECT_EQ(r.state.step_count, 1);

  EXPECT_EQ(env.step(pose_state(0.5, 0.0, 0.5), Action::kMinusY).outcome.event, StepEvent::kNotExecuted);
  EXPECT_EQ(env.step(pose_state(0.5, 0.5, 1.0), Action::kPlusZ).outcome.event, StepEvent::kNotExecuted);
}

TEST(Step, SteppingTerminalStateThrows) {
  const GraspWorld env;
  WorldState s = pose_state(0.5, 0.5, 0.5);
  s = env.step(s, Action::kClose).state;
  EXPECT_TRUE(s.terminal);
  EXPECT_THROW(env.step(s, Action::kPlusX), std::logic_error);
}

TEST(Step, MaxStepsTerminates) {
  WorldConfig cfg;
  cfg.max_steps = 3;
  const GraspWorld env(cfg);
  WorldState s = pose_state(0.2, 0.2, 0.8);
  for (int i = 0; i < 2; ++i) {
    const StepResult r = env.step(s, Action::kPlusYaw);
    EXPECT_FALSE(r.outcome.terminal);
    s = r.state;
  }
  const StepResult last = env.step(s, Action::kPlusYaw);
  EXPECT_TRUE(last.outcome.terminal);
  EXPECT_TRUE(last.state.terminal);
  EXPECT_EQ(last.state.step_count, 3);
}

// Independent capture oracle: place the object at a known gripper-frame
// offset and compare the close outcome with the capture rectangle/disk.
TEST(Step, CloseSucceedsExactlyInsideCaptureRegion) {
  const GraspWorld env;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> yaw_dist(-kPi, kPi);
  for (ObjectKind kind : kAllObjectKinds) {
    const ObjectGeometry& g = geometry(kind);
    int successes = 0, total = 0;
    for (int ia = -6; ia <= 6; ++ia) {
      for (int ib = -6; ib <= 6; ++ib) {
        const double a = ia * 0.011, b = ib * 0.011;
        const double gy = yaw_dist(rng);
        WorldState s = pose_state(0.5, 0.5, env.config().grasp_height, gy);
        s.object_kind = kind;
        s.object.x = 0.5 + a * std::cos(gy) - b * std::sin(gy);
        s.object.y = 0.5 + a * std::sin(gy) + b * std::cos(gy);
        // Aligned: the closing axis sits at the required offset from the object yaw.
        s.object.yaw = gy - g.align_offset;
        const bool inside = g.radial_capture ? std::hypot(a, b) <= g.capture_across - 1e-9
                                             : std::abs(a) <= g.capture_across - 1e-9 &&
                                                   std::abs(b) <= g.capture_along - 1e-9;
        const bool outside = g.radial_capture ? std::hypot(a, b) >= g.capture_across + 1e-9
                                              : std::abs(a) >= g.capture_across + 1e-9 ||
                                                    std::abs(b) >= g.capture_along + 1e-9;
        const StepResult r = env.step(s, Action::kClose);
        EXPECT_TRUE(r.outcome.terminal);
        if (inside) {
          EXPECT_TRUE(r.state.object_held) << to_string(kind) << " a=" << a << " b=" << b;
          EXPECT_EQ(r.outcome.event, StepEvent::kSuccess);
          EXPECT_EQ(r.outcome.reward, 10.0);
          ++successes;
        } else if (outside) {
          EXPECT_FALSE(r.state.object_held) << to_string(kind) << " a=" << a << " b=" << b;
          EXPECT_NE(r.outcome.event, StepEvent::kSuccess);
        }
        ++total;
      }
    }
    EXPECT_GT(successes, 0) << to_string(kind);
    EXPECT_LT(successes, total) << to_string(kind);
  }
}

TEST(Step, CloseAboveGraspHeightNeverCaptures) {
  const GraspWorld env;
  for (ObjectKind kind : kAllObjectKinds) {
    WorldState s = pose_state(0.5, 0.5, env.config().grasp_height + env.config().translation_step);
    s.object_kind = kind;
    s.object = {0.5, 0.5, -geometry(kind).align_offset};
    const StepResult r = env.step(s, Action::kClose);
    EXPECT_FALSE(r.state.object_held) << to_string(kind);
    EXPECT_NE(r.outcome.event, StepEvent::kSuccess);
  }
}

TEST(Step, MisalignedYawFailsForBoxesOnly) {
  const GraspWorld env;
  for (ObjectKind kind : kAllObjectKinds) {
    const ObjectGeometry& g = geometry(kind);
    WorldState s = pose_state(0.5, 0.5, env.config().grasp_height, 0.0);
    s.object_kind = kind;
    s.object = {0.5, 0.5, -g.align_offset + g.align_period / 2.0};
    const bool held = env.step(s, Action::kClose).state.object_held;
    EXPECT_EQ(held, !g.needs_alignment) << to_string(kind);
  }
}

TEST(Step, SphereNeedsTighterCentringThanCube) {
  EXPECT_LT(geometry(ObjectKind::kSphere).capture_across, geometry(ObjectKind::kCube).capture_across);
  EXPECT_LT(geometry(ObjectKind::kSphere).capture_across, geometry(ObjectKind::kCylinder).capture_along);
}

TEST(Step, FirstContactPaysOnceThenPartialCloseDoesNotPayAgain) {
  const GraspWorld env;
  // Object off-centre so the jaw pad lands on it but the grasp cannot capture.
  WorldState s = pose_state(0.5, 0.5, env.config().contact_height + env.config().translation_step);
  s.object = {0.5 + env.config().open_aperture / 2.0 + 0.01, 0.5, 0.0};
  StepResult r = env.step(s, Action::kMinusZ);
  EXPECT_EQ(r.outcome.event, StepEvent::kContact);
  EXPECT_EQ(r.outcome.reward, 1.0);
  EXPECT_TRUE(r.state.contact_rewarded);
  r = env.step(r.state, Action::kPlusYaw);
  EXPECT_NE(r.outcome.event, StepEvent::kContact);
  EXPECT_EQ(r.outcome.reward, -0.025);
  r = env.step(r.state, Action::kClose);
  EXPECT_EQ(r.outcome.event, StepEvent::kPartial);
  EXPECT_EQ(r.outcome.reward, -0.025);
}

TEST(Step, PartialCloseWithoutEarlierContactPaysContactReward) {
  const GraspWorld env;
  WorldState s = pose_state(0.5, 0.5, env.config().contact_height);
  s.object = {0.5 + env.config().open_aperture / 2.0 + 0.01, 0.5, 0.0};
  const StepResult r = env.step(s, Action::kClose);
  EXPECT_EQ(r.outcome.event, StepEvent::kPartial);
  EXPECT_EQ(r.outcome.reward, 1.0);
}

TEST(Reward, ValuesPerEvent) {
  EXPECT_EQ(reward({StepEvent::kSuccess, false}), 10.0);
  EXPECT_EQ(reward({StepEvent::kSuccess, true}), 10.0);
  EXPECT_EQ(reward({StepEvent::kContact, false}), 1.0);
  EXPECT_EQ(reward({StepEvent::kNotExecuted, false}), -1.0);
  EXPECT_EQ(reward({StepEvent::kExecuted, false}), -0.025);
  EXPECT_EQ(reward({StepEvent::kFailure, false}), -0.025);
  EXPECT_EQ(reward({StepEvent::kPartial, false}), 1.0);
  EXPECT_EQ(reward({StepEvent::kPartial, true}), -0.025);
}

TEST(IsSuccess, HeldAndHighEnough) {
  const GraspWorld env;
  WorldState s = pose_state(0.5, 0.5, 0.6);
  s.gripper_open = false;
  s.object_held = true;
  EXPECT_TRUE(env.is_success(s));
  s.gripper.z = 0.9;
  EXPECT_TRUE(env.is_success(s));
  s.gripper.z = 0.55;
  EXPECT_FALSE(env.is_success(s));
  s.object_held = false;
  for (double z : {0.0, 0.6, 1.0}) {
    s.gripper.z = z;
    EXPECT_FALSE(env.is_success(s));
  }
}

TEST(Render, ShapesAndValueRanges) {
  const GraspWorld env;
  for (ObjectKind k : kAllObjectKinds) {
    const Observation o = env.reset(11, k).observation;
    const std::size_t n = env.config().image_size;
    EXPECT_EQ(o.overhead.shape(), (tensornet::Shape{4, n, n}));
    EXPECT_EQ(o.wrist.shape(), (tensornet::Shape{3, n, n}));
    EXPECT_EQ(o.motor.shape(), (tensornet::Shape{kMotorSize}));
    for (double v : o.overhead.data()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    for (double v : o.wrist.data()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    for (double v : o.motor.data()) ASSERT_TRUE(std::isfinite(v) && v >= 0.0 && v <= 1.0);
  }
}

TEST(Render, IsPure) {
  const GraspWorld env;
  const WorldState s = env.initial_state(5, ObjectKind::kCylinder);
  EXPECT_EQ(values(env.render_overhead(s)), values(env.render_overhead(s)));
  EXPECT_EQ(values(env.render_wrist(s)), values(env.render_wrist(s)));
}

TEST(Render, EmptyTableIsBackgroundAtTableHeight) {
  const GraspWorld env;
  WorldState s = pose_state(0.85, 0.85, 0.5);
  s.object = {0.3, 0.3, 0.0};
  const tensornet::Tensor img = env.render_overhead(s);
  const std::size_t n = env.config().image_size, plane = n * n;
  // Corner pixel far from object and gripper.
  const std::size_t px = (n - 1) * n + 0;
  EXPECT_NEAR(img[px], 0.55, 1e-12);
  EXPECT_NEAR(img[plane + px], 0.47, 1e-12);
  EXPECT_NEAR(img[2 * plane + px], 0.36, 1e-12);
  EXPECT_EQ(img[3 * plane + px], 0.0);
}

TEST(Render, ObjectBlobCentredOnProjectedPixel) {
  const GraspWorld env;
  const auto& cfg = env.config();
  const std::size_t n = cfg.image_size, plane = n * n;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(0.3, 0.7), yaw(-kPi, kPi);
  for (ObjectKind k : kAllObjectKinds) {
    for (int trial = 0; trial < 20; ++trial) {
      WorldState s = pose_state(0.95, 0.95, 0.9);
      s.object_kind = k;
      s.object = {pos(rng), pos(rng), yaw(rng)};
      const tensornet::Tensor img = env.render_overhead(s);
      const auto [col, row] = centroid(n, [&](std::size_t r, std::size_t c) { return img[3 * plane + r * n + c]; });
      const double span = cfg.overhead_max - cfg.overhead_min;
      EXPECT_NEAR(col, (s.object.x - cfg.overhead_min) / span * n - 0.5, 1.0) << to_string(k);
      EXPECT_NEAR(row, (s.object.y - cfg.overhead_min) / span * n - 0.5, 1.0) << to_string(k);
    }
  }
}

TEST(Render, DepthRisesWithGripperHeight) {
  const GraspWorld env;
  const std::size_t n = env.config().image_size, plane = n * n;
  WorldState s = pose_state(0.5, 0.5, 0.2);
  s.object = {0.2, 0.2, 0.0};
  double prev = -1.0;
  for (double z : {0.2, 0.4, 0.6, 0.8}) {
    s.gripper.z = z;
    const tensornet::Tensor img = env.render_overhead(s);
    double depth = 0.0;
    for (std::size_t i = 0; i < plane; ++i) depth += img[3 * plane + i];
    EXPECT_GT(depth, prev);
    prev = depth;
  }
}

TEST(Render, WristContentShiftsWithGripperTranslation) {
  const GraspWorld env;
  const auto& cfg = env.config();
  const std::size_t n = cfg.image_size, plane = n * n;
  WorldState s = pose_state(0.5, 0.5, 0.5, 0.0);
  s.object_kind = ObjectKind::kCube;
  // Along the finger axis, clear of the pads before and after the move.
  s.object = {0.5, 0.57, 0.0};
  auto red = [&](const tensornet::Tensor& img) {
    return centroid(n, [&](std::size_t r, std::size_t c) {
      const std::size_t i = r * n + c;
      return img[i] - img[plane + i] - 0.1;
    });
  };
  const auto before = red(env.render_wrist(s));
  const auto after = red(env.render_wrist(env.step(s, Action::kPlusX).state));
  const double px_per_unit = double(n) / (2.0 * cfg.wrist_half_extent);
  EXPECT_NEAR(after.first - before.first, -cfg.translation_step * px_per_unit, 1.0);
  EXPECT_NEAR(after.second - before.second, 0.0, 1.0);
}

TEST(Render, WristFollowsGripperRotation) {
  const GraspWorld env;
  WorldState a = pose_state(0.5, 0.5, 0.5, 0.0);
  a.object = {0.5, 0.57, 0.0};
  WorldState b = a;
  b.gripper.yaw = kPi / 2.0;
  b.object = {0.5 - 0.07, 0.5, kPi / 2.0};
  const tensornet::Tensor wa = env.render_wrist(a), wb = env.render_wrist(b);
  double diff = 0.0;
  for (std::size_t i = 0; i < wa.size(); ++i) diff = std::max(diff, std::abs(wa[i] - wb[i]));
  EXPECT_LT(diff, 1e-9);
}

TEST(Motor, EncodesPoseAndAperture) {
  const GraspWorld env;
  WorldState s = pose_state(0.3, 0.4, 0.5, -kPi / 2.0);
  const tensornet::Tensor m = env.motor_state(s);
  EXPECT_EQ(m[0], 0.3);
  EXPECT_EQ(m[1], 0.4);
  EXPECT_EQ(m[2], 0.5);
  EXPECT_DOUBLE_EQ(m[3], 0.75);
  EXPECT_EQ(m[4], 1.0);
  s.gripper_open = false;
  EXPECT_EQ(env.motor_state(s)[4], 0.0);
}

// Property: random-policy episodes respect every per-step and per-episode invariant.
TEST(Properties, RandomEpisodesRespectInvariants) {
  const GraspWorld env;
  const int max_steps = env.config().max_steps;
  const std::set<double> allowed = {10.0, 1.0, -1.0, -0.025};
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> pick(0, kActionCount - 1);
  // Biased toward motion so episodes run long and hit the walls.
  std::bernoulli_distribution close_now(0.03);
  for (int episode = 0; episode < 300; ++episode) {
    const ObjectKind kind = kAllObjectKinds[episode % 3];
    WorldState s = env.initial_state(rng(), kind);
    double ret = 0.0;
    int contacts = 0;
    while (!s.terminal) {
      Action a = close_now(rng) ? Action::kClose : action_from_index(pick(rng) % 8);
      const StepResult r = env.step(s, a);
      ASSERT_TRUE(allowed.count(r.outcome.reward)) << r.outcome.reward;
      ASSERT_GE(r.state.gripper.x, 0.0);
      ASSERT_LE(r.state.gripper.x, 1.0);
      ASSERT_GE(r.state.gripper.y, 0.0);
      ASSERT_LE(r.state.gripper.y, 1.0);
      ASSERT_GE(r.state.gripper.z, 0.0);
      ASSERT_LE(r.state.gripper.z, 1.0);
      ASSERT_TRUE(!r.state.object_held || !r.state.gripper_open);
      ASSERT_LE(r.state.step_count, max_steps);
      ASSERT_EQ(r.outcome.terminal, a == Action::kClose || r.state.step_count == max_steps);
      if (r.outcome.event == StepEvent::kNotExecuted) {
        ASSERT_EQ(r.state.gripper.x, s.gripper.x);
        ASSERT_EQ(r.state.gripper.y, s.gripper.y);
        ASSERT_EQ(r.state.gripper.z, s.gripper.z);
        ASSERT_EQ(r.state.gripper.yaw, s.gripper.yaw);
      }
      if (r.outcome.reward == 1.0) ++contacts;
      ret += r.outcome.reward;
      s = r.state;
    }
    EXPECT_LE(contacts, 1);
    // Tightest bound: one success, one contact, every other step at least -0.025.
    const int steps = s.step_count;
    EXPECT_LE(ret, 11.0 - 0.025 * std::max(0, steps - 2) + 1e-9);
  }
}

TEST(Properties, IdenticalSeedAndActionsGiveIdenticalTraces) {
  const GraspWorld env;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> pick(0, kActionCount - 1);
  std::vector<Action> actions;
  for (int i = 0; i < 40; ++i) actions.push_back(action_from_index(pick(rng)));
  auto trace = [&]() {
    std::vector<std::pair<WorldState, std::vector<double>>> out;
    WorldState s = env.initial_state(123, ObjectKind::kCylinder);
    for (Action a : actions) {
      if (s.terminal) break;
      const StepResult r = env.step(s, a);
      const Observation o = env.observe(r.state);
      std::vector<double> flat = values(o.overhead);
      flat.insert(flat.end(), o.wrist.data().begin(), o.wrist.data().end());
      flat.push_back(r.outcome.reward);
      out.emplace_back(r.state, std::move(flat));
      s = r.state;
    }
    return out;
  };
  EXPECT_EQ(trace(), trace());
}

TEST(ScriptedOracle, PlanSucceedsOnEachKind) {
  const GraspWorld env;
  for (ObjectKind k : kAllObjectKinds) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const StepResult r = testing::run_scripted(env, env.initial_state(seed, k));
      if (r.outcome.event == StepEvent::kSuccess) ++wins;
    }
    EXPECT_GE(wins, 36) << to_string(k);
  }
}

}  // namespace
}  // namespace graspq::world
