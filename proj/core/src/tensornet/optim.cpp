#include "graspq/tensornet/optim.hpp"

#include <cmath>

namespace graspq::tensornet {

void sgd_step(ParamSet& params, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamEntry& e = params.entry(i);
    if (e.kind != ParamKind::kTrainable) continue;
    for (std::size_t j = 0; j < e.value.size(); ++j) e.value[j] -= lr * e.grad[j];
  }
  params.zero_grad();
}

void adam_step(ParamSet& params, double lr, double beta1, double beta2, double eps) {
  const std::int64_t t = params.adam_steps() + 1;
  params.set_adam_steps(t);
  const double c1 = 1.0 - std::pow(beta1, double(t));
  const double c2 = 1.0 - std::pow(beta2, double(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamEntry& e = params.entry(i);
    if (e.kind != ParamKind::kTrainable) continue;
    if (e.adam_m.shape() != e.value.shape()) {
      e.adam_m = Tensor(e.value.shape());
      e.adam_v = Tensor(e.value.shape());
    }
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      const double g = e.grad[j];
      e.adam_m[j] = beta1 * e.adam_m[j] + (1.0 - beta1) * g;
      e.adam_v[j] = beta2 * e.adam_v[j] + (1.0 - beta2) * g * g;
      e.value[j] -= lr * (e.adam_m[j] / c1) / (std::sqrt(e.adam_v[j] / c2) + eps);
    }
  }
  params.zero_grad();
}

void Optimizer::step(ParamSet& params) const {
  if (kind == OptimizerKind::kSgd) {
    sgd_step(params, lr);
  } else {
    adam_step(params, lr, beta1, beta2, eps);
  }
}

}  // namespace graspq::tensornet
