#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "graspq/tensornet/param_set.hpp"
#include "graspq/tensornet/tensor.hpp"

namespace graspq::tensornet {

/// Handle to a node recorded on a Graph.
struct Var {
  std::size_t id = 0;
};

enum class Mode { kTrain, kInfer };

/// Tape of forward operations supporting one reverse-mode pass.
///
/// Nodes are appended in evaluation order, so reverse insertion order is a
/// valid reverse topological order. Values of parameter leaves are borrowed
/// from their ParamSet, which must outlive the graph.
class Graph {
 public:
  /// Receives the graph and the handle of the node it was recorded for.
  using BackwardFn = std::function<void(Graph&, Var)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Borrowed leaf without gradient.
  Var view(const Tensor& value);
  /// Leaf whose gradient is accumulated into `params` by backward().
  Var parameter(ParamSet& params, std::size_t index);
  Var parameter(ParamSet& params, std::string_view name);
  /// Read-only parameter leaf: no gradient is tracked.
  Var parameter(const ParamSet& params, std::string_view name);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  /// Gradient reaching `v` during backward(); zeros when nothing flowed.
  Tensor grad(Var v) const;

  /// Records an operation output. `backward` is dropped when no input needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Gradient accumulator of `v`, zero-initialized on first access. For use inside BackwardFn.
  Tensor& grad_buffer(Var v);
  const Tensor& output_grad(Var v) const;

  /// Reverse pass from a scalar loss. Zeroes the gradients of every bound
  /// ParamSet first, so unused parameters end with zero gradient.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t op_count() const { return op_count_; }
  std::size_t backward_visits() const { return backward_visits_; }

 private:
  struct Node {
    Tensor owned;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
    ParamSet* params = nullptr;
    std::size_t param_index = 0;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::deque<Node> nodes_;
  std::vector<ParamSet*> bound_;
  std::size_t op_count_ = 0;
  std::size_t backward_visits_ = 0;
  bool backward_done_ = false;
};

}  // namespace graspq::tensornet
