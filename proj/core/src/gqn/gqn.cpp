#include "graspq/gqn/gqn.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "graspq/tensornet/ops.hpp"

namespace graspq::gqn {

using tensornet::BatchNormSpec;
using tensornet::ConvSpec;
using tensornet::DenseSpec;
using tensornet::Graph;
using tensornet::Mode;
using tensornet::ParamSet;
using tensornet::Tensor;
using tensornet::Var;

namespace {

constexpr std::size_t kOverheadChannels = 4;
constexpr std::size_t kWristChannels = 3;

struct Stream {
  const char* name;
  std::size_t channels;
};

constexpr Stream kOverhead{"overhead", kOverheadChannels};
constexpr Stream kWrist{"wrist", kWristChannels};

std::string key(const char* layer, const char* field) { return std::string(layer) + "." + field; }

}  // namespace

std::string_view to_string(ViewMode mode) { return mode == ViewMode::kSingle ? "single" : "multi"; }

GraspQNetwork::GraspQNetwork(GqnConfig config) : config_(config) {
  if (config_.image_size < 4) throw std::invalid_argument("GQN image_size must be at least 4");
  for (std::size_t c : config_.conv_channels) {
    if (c == 0) throw std::invalid_argument("GQN conv channel widths must be positive");
  }
  if (config_.vision_hidden == 0 || config_.motor_hidden == 0 || config_.head_hidden == 0) {
    throw std::invalid_argument("GQN hidden widths must be positive");
  }
  if (config_.action_count != world::kActionCount) {
    throw std::invalid_argument("GQN action_count must be " + std::to_string(world::kActionCount));
  }
  stem_size_ = (config_.image_size + 2 * 3 - 7) / 2 + 1;
  if (stem_size_ < 2) throw std::invalid_argument("GQN image_size too small for 2x2 pooling");
  pooled_size_ = (stem_size_ - 2) / 2 + 1;
}

std::vector<tensornet::LayerSpec> GraspQNetwork::layer_spec() const {
  const auto [c1, c2, c3] = config_.conv_channels;
  std::vector<tensornet::LayerSpec> layers;
  std::vector<Stream> streams{kOverhead};
  if (config_.view_mode == ViewMode::kMulti) streams.push_back(kWrist);
  for (const Stream& s : streams) {
    const std::string p = s.name;
    layers.emplace_back(ConvSpec{p + ".conv1", s.channels, c1, 7});
    layers.emplace_back(BatchNormSpec{p + ".bn1", c1});
    layers.emplace_back(ConvSpec{p + ".conv2", c1, c2, 5});
    layers.emplace_back(ConvSpec{p + ".conv3", c2, c3, 3});
    layers.emplace_back(BatchNormSpec{p + ".bn3", c3});
  }
  layers.emplace_back(ConvSpec{"fusion.conv", c3 * streams.size(), c3, 3});
  layers.emplace_back(DenseSpec{"vision.fc", c3 * pooled_size_ * pooled_size_, config_.vision_hidden});
  layers.emplace_back(DenseSpec{"motor.fc1", world::kMotorSize, config_.motor_hidden});
  layers.emplace_back(DenseSpec{"motor.fc2", config_.motor_hidden, config_.motor_hidden});
  layers.emplace_back(DenseSpec{"head.fc1", config_.vision_hidden + config_.motor_hidden, config_.head_hidden});
  layers.emplace_back(DenseSpec{"head.fc2", config_.head_hidden, config_.head_hidden});
  layers.emplace_back(DenseSpec{"head.q", config_.head_hidden, config_.action_count});
  return layers;
}

ParamSet GraspQNetwork::build(std::uint64_t seed) const { return tensornet::init_params(layer_spec(), seed); }

void GraspQNetwork::validate(const ParamSet& params) const {
  const ParamSet ref = tensornet::init_params(layer_spec(), 0);
  if (params.size() != ref.size()) {
    throw std::invalid_argument("parameter set has " + std::to_string(params.size()) + " entries, network expects " +
                                std::to_string(ref.size()));
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto& want = ref.entry(i);
    const auto& got = params.entry(i);
    if (want.name != got.name || want.value.shape() != got.value.shape()) {
      throw std::invalid_argument("parameter " + std::to_string(i) + " is '" + got.name + "' " +
                                  tensornet::shape_string(got.value.shape()) + ", network expects '" + want.name +
                                  "' " + tensornet::shape_string(want.value.shape()));
    }
  }
}

void GraspQNetwork::check_input(const Input& obs) const {
  const std::size_t s = config_.image_size;
  if (obs.overhead.shape() != tensornet::Shape{kOverheadChannels, s, s}) {
    throw std::invalid_argument("overhead image shape " + tensornet::shape_string(obs.overhead.shape()) +
                                " does not match network input " +
                                tensornet::shape_string({kOverheadChannels, s, s}));
  }
  if (config_.view_mode == ViewMode::kMulti && obs.wrist.shape() != tensornet::Shape{kWristChannels, s, s}) {
    throw std::invalid_argument("wrist image shape " + tensornet::shape_string(obs.wrist.shape()) +
                                " does not match network input " + tensornet::shape_string({kWristChannels, s, s}));
  }
  if (obs.motor.shape() != tensornet::Shape{world::kMotorSize}) {
    throw std::invalid_argument("motor vector shape " + tensornet::shape_string(obs.motor.shape()) +
                                " does not match network input [5]");
  }
}

template <class Params>
Var GraspQNetwork::forward_impl(Graph& g, Params& params, std::span<const Input* const> batch, Mode mode) const {
  constexpr bool kMutable = !std::is_const_v<Params>;
  if (batch.empty()) throw std::invalid_argument("GQN forward on an empty batch");
  for (const Input* obs : batch) check_input(*obs);
  const std::size_t n = batch.size();
  const std::size_t s = config_.image_size;

  auto stack = [&](auto member, std::size_t channels) {
    const std::size_t per = channels * s * s;
    Tensor t({n, channels, s, s});
    for (std::size_t b = 0; b < n; ++b) {
      const Tensor& src = (*batch[b]).*member;
      std::copy(src.raw(), src.raw() + per, t.raw() + b * per);
    }
    return g.constant(std::move(t));
  };
  auto param = [&](const std::string& name) { return g.parameter(params, name); };
  auto bn = [&](Var x, const std::string& layer) {
    Var gamma = param(layer + ".gamma");
    Var beta = param(layer + ".beta");
    if constexpr (kMutable) {
      return tensornet::batchnorm(g, x, gamma, beta, params.value(layer + ".running_mean"),
                                  params.value(layer + ".running_var"), mode);
    } else {
      return tensornet::batchnorm(g, x, gamma, beta, params.value(layer + ".running_mean"),
                                  params.value(layer + ".running_var"));
    }
  };
  auto conv = [&](Var x, const std::string& layer, std::size_t stride, std::size_t pad) {
    return tensornet::conv2d(g, x, param(layer + ".weight"), param(layer + ".bias"), stride, pad);
  };
  auto fc = [&](Var x, const char* layer) {
    return tensornet::dense(g, x, param(key(layer, "weight")), param(key(layer, "bias")));
  };
  auto stream = [&](Var img, const std::string& p) {
    Var h = tensornet::relu(g, bn(conv(img, p + ".conv1", 2, 3), p + ".bn1"));
    h = tensornet::relu(g, conv(h, p + ".conv2", 1, 2));
    h = tensornet::relu(g, bn(conv(h, p + ".conv3", 1, 1), p + ".bn3"));
    return tensornet::maxpool2d(g, h, 2, 2);
  };

  std::vector<Var> features{stream(stack(&Input::overhead, kOverheadChannels), kOverhead.name)};
  if (config_.view_mode == ViewMode::kMulti) {
    features.push_back(stream(stack(&Input::wrist, kWristChannels), kWrist.name));
  }
  Var vision = features.size() == 1 ? features[0] : tensornet::concat(g, features);
  vision = tensornet::relu(g, conv(vision, "fusion.conv", 1, 1));
  vision = tensornet::relu(g, fc(tensornet::flatten(g, vision), "vision.fc"));

  Tensor motor({n, world::kMotorSize});
  for (std::size_t b = 0; b < n; ++b) {
    std::copy_n(batch[b]->motor.raw(), world::kMotorSize, motor.raw() + b * world::kMotorSize);
  }
  Var m = tensornet::relu(g, fc(g.constant(std::move(motor)), "motor.fc1"));
  m = tensornet::relu(g, fc(m, "motor.fc2"));

  const Var joined_parts[] = {vision, m};
  Var h = tensornet::relu(g, fc(tensornet::concat(g, joined_parts), "head.fc1"));
  h = tensornet::relu(g, fc(h, "head.fc2"));
  return fc(h, "head.q");
}

Var GraspQNetwork::forward(Graph& g, ParamSet& params, std::span<const Input* const> batch, Mode mode) const {
  return forward_impl(g, params, batch, mode);
}

Var GraspQNetwork::forward(Graph& g, const ParamSet& params, std::span<const Input* const> batch) const {
  return forward_impl(g, params, batch, Mode::kInfer);
}

namespace {

ActionValues first_row(const Graph& g, Var q) {
  ActionValues out{};
  std::copy_n(g.value(q).raw(), out.size(), out.begin());
  return out;
}

}  // namespace

ActionValues q_values(const GraspQNetwork& net, const ParamSet& params, const world::Observation& obs) {
  Graph g;
  const world::Observation* batch[] = {&obs};
  return first_row(g, net.forward(g, params, batch));
}

ActionValues q_values(const GraspQNetwork& net, ParamSet& params, const world::Observation& obs, Mode mode) {
  Graph g;
  const world::Observation* batch[] = {&obs};
  return first_row(g, net.forward(g, params, batch, mode));
}

ActionValues grasp_probabilities(const ActionValues& q) {
  const auto p = tensornet::softmax(std::span<const double>(q));
  ActionValues out{};
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

}  // namespace graspq::gqn
