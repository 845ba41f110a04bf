#include "graspq/tensornet/param_set.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace graspq::tensornet {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

void require_positive(const std::string& layer, std::string_view what, std::size_t value) {
  if (value == 0) {
    throw std::invalid_argument("layer '" + layer + "': " + std::string(what) + " must be positive");
  }
}

Tensor glorot_uniform(Shape shape, double fan_in, double fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

std::size_t ParamSet::add(std::string name, Tensor value, ParamKind kind) {
  if (find(name)) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  ParamEntry e;
  e.grad = Tensor(value.shape());
  e.name = std::move(name);
  e.value = std::move(value);
  e.kind = kind;
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamSet::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.kind == ParamKind::kTrainable) n += e.value.size();
  }
  return n;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) e.grad.fill(0.0);
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.name != y.name || x.kind != y.kind || !bit_equal(x.value, y.value) ||
        !bit_equal(x.grad, y.grad)) {
      return false;
    }
  }
  return true;
}

ParamSet copy_params(const ParamSet& src) { return src; }

ParamKind kind_from_name(std::string_view name) {
  return ends_with(name, ".running_mean") || ends_with(name, ".running_var") ? ParamKind::kRunningStat
                                                                              : ParamKind::kTrainable;
}

ParamSet init_params(const std::vector<LayerSpec>& layers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet params;
  for (const auto& layer : layers) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      require_positive(d->name, "input width", d->in);
      require_positive(d->name, "output width", d->out);
      params.add(d->name + ".weight",
                 glorot_uniform({d->in, d->out}, double(d->in), double(d->out), rng));
      params.add(d->name + ".bias", Tensor({d->out}));
    } else if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      require_positive(c->name, "input channels", c->in_channels);
      require_positive(c->name, "output channels", c->out_channels);
      require_positive(c->name, "kernel size", c->kernel);
      const double area = double(c->kernel * c->kernel);
      params.add(c->name + ".weight",
                 glorot_uniform({c->out_channels, c->in_channels, c->kernel, c->kernel},
                                double(c->in_channels) * area, double(c->out_channels) * area, rng));
      params.add(c->name + ".bias", Tensor({c->out_channels}));
    } else {
      const auto& b = std::get<BatchNormSpec>(layer);
      require_positive(b.name, "channel count", b.channels);
      params.add(b.name + ".gamma", Tensor({b.channels}, 1.0));
      params.add(b.name + ".beta", Tensor({b.channels}));
      params.add(b.name + ".running_mean", Tensor({b.channels}), ParamKind::kRunningStat);
      params.add(b.name + ".running_var", Tensor({b.channels}, 1.0), ParamKind::kRunningStat);
    }
  }
  return params;
}

}  // namespace graspq::tensornet
