#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "graspq/tensornet/graph.hpp"
#include "graspq/tensornet/param_set.hpp"
#include "graspq/world/types.hpp"

namespace graspq::gqn {

using ActionValues = std::array<double, world::kActionCount>;

enum class ViewMode { kSingle, kMulti };

std::string_view to_string(ViewMode mode);

struct GqnConfig {
  ViewMode view_mode = ViewMode::kMulti;
  std::size_t image_size = 16;
  // Per image stream: 7x7/2 conv, 5x5 conv, 3x3 conv.
  std::array<std::size_t, 3> conv_channels = {8, 16, 16};
  std::size_t vision_hidden = 64;
  std::size_t motor_hidden = 64;
  std::size_t head_hidden = 64;
  std::size_t action_count = world::kActionCount;
};

/// Two-stream Grasp-Q-Network.
///
/// Each image stream runs conv7x7/2 + batchnorm + relu, conv5x5 + relu,
/// conv3x3 + batchnorm + relu, maxpool 2x2. Streams are concatenated along
/// channels and pass through a fusion conv3x3 + relu and one dense + relu
/// layer. The motor vector passes through two dense + relu layers. Vision and
/// motor features are concatenated and fed to two dense + relu layers and
/// the linear Q head. Single-view mode drops the wrist stream.
class GraspQNetwork {
 public:
  using Input = world::Observation;

  GraspQNetwork() : GraspQNetwork(GqnConfig{}) {}
  explicit GraspQNetwork(GqnConfig config);

  const GqnConfig& config() const { return config_; }
  std::size_t action_count() const { return config_.action_count; }

  std::vector<tensornet::LayerSpec> layer_spec() const;
  /// Fresh parameters for this architecture.
  tensornet::ParamSet build(std::uint64_t seed) const;
  /// Throws unless `params` has exactly this architecture's names and shapes.
  void validate(const tensornet::ParamSet& params) const;

  /// Q-values [B, actions]. Parameters are gradient leaves; train mode also
  /// folds batch statistics into the running statistics.
  tensornet::Var forward(tensornet::Graph& g, tensornet::ParamSet& params, std::span<const Input* const> batch,
                         tensornet::Mode mode) const;
  /// Inference-mode Q-values [B, actions] on read-only parameters.
  tensornet::Var forward(tensornet::Graph& g, const tensornet::ParamSet& params,
                         std::span<const Input* const> batch) const;

 private:
  template <class Params>
  tensornet::Var forward_impl(tensornet::Graph& g, Params& params, std::span<const Input* const> batch,
                              tensornet::Mode mode) const;
  void check_input(const Input& obs) const;

  GqnConfig config_;
  std::size_t stem_size_ = 0;    // spatial size after the strided conv
  std::size_t pooled_size_ = 0;  // spatial size after max-pooling
};

/// Inference-mode Q-values of one observation.
ActionValues q_values(const GraspQNetwork& net, const tensornet::ParamSet& params, const world::Observation& obs);
/// Q-values in the requested mode; train mode updates batchnorm running statistics.
ActionValues q_values(const GraspQNetwork& net, tensornet::ParamSet& params, const world::Observation& obs,
                      tensornet::Mode mode);

/// Softmax view of Q-values, for reporting only.
ActionValues grasp_probabilities(const ActionValues& q);

}  // namespace graspq::gqn
