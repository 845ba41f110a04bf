#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "graspq/tensornet/graph.hpp"
#include "graspq/tensornet/tensor.hpp"

namespace graspq::tensornet {

inline constexpr double kBatchNormEpsilon = 1e-5;
/// Fraction of the running statistic retained on each train-mode update.
inline constexpr double kBatchNormMomentum = 0.9;

/// y = x W + b for x of shape [in] or [batch, in], W [in, out], b [out].
Var dense(Graph& g, Var x, Var weight, Var bias);

/// 2-D cross-correlation. x is [C, H, W] or [B, C, H, W]; weight [O, C, k, k]; bias [O].
/// Output spatial size is floor((H + 2 * padding - k) / stride) + 1.
Var conv2d(Graph& g, Var x, Var weight, Var bias, std::size_t stride, std::size_t padding);

/// Per-window maximum over the two trailing axes. The gradient goes to the
/// first row-major maximum of each window.
Var maxpool2d(Graph& g, Var x, std::size_t window, std::size_t stride);

/// Per-channel normalization with learnable scale and shift.
///
/// Channels are axis 1 of [B, C, ...] inputs and axis 0 of [C, H, W] inputs.
/// Train mode normalizes with the biased batch statistics and folds them into
/// the running statistics; infer mode normalizes with the running statistics.
Var batchnorm(Graph& g, Var x, Var gamma, Var beta, Tensor& running_mean, Tensor& running_var, Mode mode);
/// Inference-only overload for read-only statistics.
Var batchnorm(Graph& g, Var x, Var gamma, Var beta, const Tensor& running_mean, const Tensor& running_var);

/// max(0, x); the subgradient at exactly zero is zero.
Var relu(Graph& g, Var x);

/// Softmax over the last axis, stabilized by subtracting the row maximum.
Var softmax(Graph& g, Var x);
std::vector<double> softmax(std::span<const double> logits);

/// Mean squared error against a constant target.
Var mse_loss(Graph& g, Var pred, const Tensor& target);

/// Concatenation along axis 1 of [B, C_i, ...] tensors with matching other axes.
Var concat(Graph& g, std::span<const Var> parts);

/// [B, ...] -> [B, product of remaining axes].
Var flatten(Graph& g, Var x);

/// out[b] = x[b, index[b]] for x of shape [B, A].
Var gather_columns(Graph& g, Var x, std::span<const std::size_t> index);

/// Scalar mean of all elements.
Var mean(Graph& g, Var x);

/// Scalar sum of x * weights (weights constant, same shape as x).
Var weighted_sum(Graph& g, Var x, const Tensor& weights);

}  // namespace graspq::tensornet
