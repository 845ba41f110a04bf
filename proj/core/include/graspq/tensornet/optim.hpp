#pragma once

#include "graspq/tensornet/param_set.hpp"

namespace graspq::tensornet {

/// w -= lr * grad on trainable entries, then zero all grads.
void sgd_step(ParamSet& params, double lr);

/// Bias-corrected Adam on trainable entries; moments live in the entries.
/// Grads are zeroed afterwards.
void adam_step(ParamSet& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

enum class OptimizerKind { kSgd, kAdam };

struct Optimizer {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void step(ParamSet& params) const;
};

}  // namespace graspq::tensornet
