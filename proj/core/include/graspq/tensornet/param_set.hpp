#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "graspq/tensornet/tensor.hpp"

namespace graspq::tensornet {

enum class ParamKind {
  kTrainable,
  kRunningStat,  // batchnorm statistics: persisted and copied, never optimized
};

struct ParamEntry {
  std::string name;
  Tensor value;
  Tensor grad;
  ParamKind kind = ParamKind::kTrainable;
  // Adam moments, allocated lazily by the first adam_step.
  Tensor adam_m;
  Tensor adam_v;
};

/// Ordered, uniquely named collection of tensors making up one network instance.
class ParamSet {
 public:
  std::size_t add(std::string name, Tensor value, ParamKind kind = ParamKind::kTrainable);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const ParamEntry& entry(std::size_t i) const { return entries_.at(i); }
  ParamEntry& entry(std::size_t i) { return entries_.at(i); }
  const std::vector<ParamEntry>& entries() const { return entries_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  const Tensor& value(std::string_view name) const { return entries_[index_of(name)].value; }
  Tensor& value(std::string_view name) { return entries_[index_of(name)].value; }
  const Tensor& grad(std::string_view name) const { return entries_[index_of(name)].grad; }

  /// Number of trainable scalars.
  std::size_t parameter_count() const;

  void zero_grad();

  std::int64_t adam_steps() const { return adam_steps_; }
  void set_adam_steps(std::int64_t steps) { adam_steps_ = steps; }

  /// Bitwise equality of names, kinds, values and grads.
  friend bool operator==(const ParamSet& a, const ParamSet& b);

 private:
  std::vector<ParamEntry> entries_;
  std::int64_t adam_steps_ = 0;
};

/// Deep copy; the result compares equal to the source and shares no storage.
ParamSet copy_params(const ParamSet& src);

/// Layer descriptions consumed by init_params.
struct DenseSpec {
  std::string name;
  std::size_t in = 0;
  std::size_t out = 0;
};

struct ConvSpec {
  std::string name;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
};

struct BatchNormSpec {
  std::string name;
  std::size_t channels = 0;
};

using LayerSpec = std::variant<DenseSpec, ConvSpec, BatchNormSpec>;

/// Creates parameters for each layer in order.
///
/// Weights are drawn uniformly from +-sqrt(6 / (fan_in + fan_out)) with a
/// single mt19937_64 stream seeded by `seed`, consumed layer by layer.
/// Biases and batchnorm shifts start at zero, batchnorm scales at one,
/// running means at zero and running variances at one.
///
/// Entry names: `<layer>.weight`, `<layer>.bias`, `<layer>.gamma`,
/// `<layer>.beta`, `<layer>.running_mean`, `<layer>.running_var`.
/// Dense weights are [in, out]; conv weights are [out, in, k, k].
ParamSet init_params(const std::vector<LayerSpec>& layers, std::uint64_t seed);

/// Kind implied by an entry name (running statistics end in `.running_mean`/`.running_var`).
ParamKind kind_from_name(std::string_view name);

}  // namespace graspq::tensornet
