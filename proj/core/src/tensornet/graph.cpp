#include "graspq/tensornet/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace graspq::tensornet {

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("invalid graph variable " + std::to_string(v.id));
  return nodes_[v.id];
}

Graph::Node& Graph::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("invalid graph variable " + std::to_string(v.id));
  return nodes_[v.id];
}

Var Graph::constant(Tensor value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  return {nodes_.size() - 1};
}

Var Graph::view(const Tensor& value) {
  Node& n = nodes_.emplace_back();
  n.borrowed = &value;
  return {nodes_.size() - 1};
}

Var Graph::parameter(ParamSet& params, std::size_t index) {
  ParamEntry& e = params.entry(index);
  Node& n = nodes_.emplace_back();
  n.borrowed = &e.value;
  n.requires_grad = true;
  n.params = &params;
  n.param_index = index;
  if (std::find(bound_.begin(), bound_.end(), &params) == bound_.end()) bound_.push_back(&params);
  return {nodes_.size() - 1};
}

Var Graph::parameter(ParamSet& params, std::string_view name) {
  return parameter(params, params.index_of(name));
}

Var Graph::parameter(const ParamSet& params, std::string_view name) {
  return view(params.value(name));
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.borrowed ? *n.borrowed : n.owned;
}

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

Tensor Graph::grad(Var v) const {
  const Node& n = node(v);
  return n.has_grad ? n.grad : Tensor(value(v).shape());
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Graph::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (Var in : inputs) {
    if (node(in).requires_grad) needs = true;
  }
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  ++op_count_;
  return {nodes_.size() - 1};
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = node(v);
  if (!n.has_grad) {
    n.grad = Tensor(value(v).shape());
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor& Graph::output_grad(Var v) const {
  const Node& n = node(v);
  if (!n.has_grad) throw std::logic_error("output gradient requested before it was produced");
  return n.grad;
}

void Graph::backward(Var loss) {
  if (op_count_ == 0) throw std::logic_error("backward called before any forward operation was recorded");
  if (backward_done_) throw std::logic_error("backward already ran on this graph");
  if (value(loss).size() != 1) {
    throw std::invalid_argument("backward needs a scalar loss, got shape " + shape_string(value(loss).shape()));
  }
  backward_done_ = true;
  for (ParamSet* p : bound_) p->zero_grad();

  grad_buffer(loss)[0] = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, Var{id});
    ++backward_visits_;
  }
  for (Node& n : nodes_) {
    if (n.params == nullptr || !n.has_grad) continue;
    Tensor& dst = n.params->entry(n.param_index).grad;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
  }
}

}  // namespace graspq::tensornet
