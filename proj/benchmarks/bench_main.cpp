#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "graspq/gqn/gqn.hpp"
#include "graspq/tensornet/ops.hpp"
#include "graspq/tensornet/optim.hpp"
#include "graspq/world/grasp_world.hpp"

namespace {

using namespace graspq;

std::vector<world::Observation> observations(std::size_t image_size, std::size_t n) {
  world::WorldConfig cfg;
  cfg.image_size = image_size;
  const world::GraspWorld env(cfg);
  std::vector<world::Observation> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(env.reset(i, world::ObjectKind::kCube).observation);
  return out;
}

gqn::GqnConfig net_config(benchmark::State& state) {
  gqn::GqnConfig cfg;
  cfg.image_size = static_cast<std::size_t>(state.range(0));
  cfg.view_mode = state.range(1) ? gqn::ViewMode::kMulti : gqn::ViewMode::kSingle;
  return cfg;
}

void BM_Render(benchmark::State& state) {
  world::WorldConfig cfg;
  cfg.image_size = static_cast<std::size_t>(state.range(0));
  const world::GraspWorld env(cfg);
  const auto s = env.initial_state(3, world::ObjectKind::kCylinder);
  for (auto _ : state) benchmark::DoNotOptimize(env.observe(s));
}
BENCHMARK(BM_Render)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_Conv2dForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  tensornet::ParamSet ps = tensornet::init_params({tensornet::ConvSpec{"c", 16, 16, 3}}, 1);
  tensornet::Tensor x({n, 16, 8, 8}, 0.5);
  for (auto _ : state) {
    tensornet::Graph g;
    auto y = tensornet::conv2d(g, g.view(x), g.parameter(std::as_const(ps), "c.weight"),
                               g.parameter(std::as_const(ps), "c.bias"), 1, 1);
    benchmark::DoNotOptimize(g.value(y).raw());
  }
}
BENCHMARK(BM_Conv2dForward)->Arg(1)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_GqnInfer(benchmark::State& state) {
  const gqn::GraspQNetwork net(net_config(state));
  const auto params = net.build(1);
  const auto obs = observations(net.config().image_size, 1);
  for (auto _ : state) benchmark::DoNotOptimize(gqn::q_values(net, params, obs[0]));
}
BENCHMARK(BM_GqnInfer)->Args({16, 1})->Args({16, 0})->Args({32, 1})->Unit(benchmark::kMicrosecond);

void BM_GqnTrainStep(benchmark::State& state) {
  const gqn::GraspQNetwork net(net_config(state));
  auto params = net.build(1);
  const auto obs = observations(net.config().image_size, static_cast<std::size_t>(state.range(2)));
  std::vector<const world::Observation*> batch;
  for (const auto& o : obs) batch.push_back(&o);
  const tensornet::Tensor target({batch.size()}, 1.0);
  std::vector<std::size_t> actions(batch.size(), 3);
  const tensornet::Optimizer opt{tensornet::OptimizerKind::kAdam};
  for (auto _ : state) {
    tensornet::Graph g;
    auto q = net.forward(g, params, batch, tensornet::Mode::kTrain);
    auto loss = tensornet::mse_loss(g, tensornet::gather_columns(g, q, actions), target);
    g.backward(loss);
    opt.step(params);
  }
}
BENCHMARK(BM_GqnTrainStep)->Args({16, 1, 32})->Args({16, 0, 32})->Args({32, 1, 32})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
