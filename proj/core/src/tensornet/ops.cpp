#include "graspq/tensornet/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace graspq::tensornet {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

[[noreturn]] void shape_error(const std::string& op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(op + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Image tensors are viewed as [batch, channels, height, width].
struct ImageDims {
  std::size_t batch, channels, height, width;
  bool batched;
};

ImageDims image_dims(const std::string& op, const Shape& s) {
  if (s.size() == 3) return {1, s[0], s[1], s[2], false};
  if (s.size() == 4) return {s[0], s[1], s[2], s[3], true};
  throw std::invalid_argument(op + ": expected [C,H,W] or [B,C,H,W], got " + shape_string(s));
}

Shape image_shape(const ImageDims& d, std::size_t channels, std::size_t h, std::size_t w) {
  return d.batched ? Shape{d.batch, channels, h, w} : Shape{channels, h, w};
}

// [outer, channels, inner] view used by batchnorm.
struct ChannelView {
  std::size_t outer, channels, inner;
};

ChannelView channel_view(const Shape& s) {
  if (s.empty()) throw std::invalid_argument("batchnorm: scalar input has no channel axis");
  if (s.size() == 1) return {1, s[0], 1};
  if (s.size() == 3) return {1, s[0], s[1] * s[2]};
  std::size_t inner = 1;
  for (std::size_t i = 2; i < s.size(); ++i) inner *= s[i];
  return {s[0], s[1], inner};
}

}  // namespace

Var dense(Graph& g, Var x, Var weight, Var bias) {
  const Tensor& xv = g.value(x);
  const Tensor& wv = g.value(weight);
  const Tensor& bv = g.value(bias);
  if (wv.rank() != 2) throw std::invalid_argument("dense: weight must be [in,out], got " + shape_string(wv.shape()));
  const std::size_t in = wv.dim(0), out = wv.dim(1);
  if (bv.shape() != Shape{out}) shape_error("dense bias", wv.shape(), bv.shape());
  std::size_t batch = 0;
  if (xv.rank() == 1 && xv.dim(0) == in) {
    batch = 1;
  } else if (xv.rank() == 2 && xv.dim(1) == in) {
    batch = xv.dim(0);
  } else {
    shape_error("dense", xv.shape(), wv.shape());
  }

  Tensor y(xv.rank() == 1 ? Shape{out} : Shape{batch, out});
  ConstMatMap X(xv.raw(), batch, in);
  ConstMatMap W(wv.raw(), in, out);
  MatMap Y(y.raw(), batch, out);
  Y.noalias() = X * W;
  Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bv.raw(), out);

  return g.record(std::move(y), {x, weight, bias}, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    ConstMatMap DY(dy.raw(), batch, out);
    if (gr.requires_grad(weight)) {
      Tensor& dw = gr.grad_buffer(weight);
      MatMap(dw.raw(), in, out).noalias() += ConstMatMap(gr.value(x).raw(), batch, in).transpose() * DY;
    }
    if (gr.requires_grad(bias)) {
      Tensor& db = gr.grad_buffer(bias);
      Eigen::Map<Eigen::RowVectorXd>(db.raw(), out) += DY.colwise().sum();
    }
    if (gr.requires_grad(x)) {
      Tensor& dx = gr.grad_buffer(x);
      MatMap(dx.raw(), batch, in).noalias() += DY * ConstMatMap(gr.value(weight).raw(), in, out).transpose();
    }
  });
}

Var conv2d(Graph& g, Var x, Var weight, Var bias, std::size_t stride, std::size_t padding) {
  const Tensor& xv = g.value(x);
  const Tensor& wv = g.value(weight);
  const Tensor& bv = g.value(bias);
  if (stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
  const ImageDims d = image_dims("conv2d", xv.shape());
  if (wv.rank() != 4 || wv.dim(1) != d.channels || wv.dim(2) != wv.dim(3)) {
    shape_error("conv2d", xv.shape(), wv.shape());
  }
  const std::size_t out_ch = wv.dim(0), k = wv.dim(2);
  if (bv.shape() != Shape{out_ch}) shape_error("conv2d bias", wv.shape(), bv.shape());
  const std::size_t ph = d.height + 2 * padding, pw = d.width + 2 * padding;
  if (k > ph || k > pw) {
    throw std::invalid_argument("conv2d: kernel " + std::to_string(k) + " larger than padded input " +
                                std::to_string(ph) + "x" + std::to_string(pw));
  }
  const std::size_t oh = (ph - k) / stride + 1, ow = (pw - k) / stride + 1;
  const std::size_t plane = oh * ow;
  const std::size_t rows = d.channels * k * k;
  const std::size_t cols_n = d.batch * plane;
  const auto pad = static_cast<std::ptrdiff_t>(padding);

  // im2col: row (c, ki, kj), column (b, oy, ox).
  auto cols = std::make_shared<Buffer>(rows * cols_n, 0.0);
  {
    const double* src = xv.raw();
    for (std::size_t c = 0; c < d.channels; ++c) {
      for (std::size_t ki = 0; ki < k; ++ki) {
        for (std::size_t kj = 0; kj < k; ++kj) {
          double* row = cols->data() + ((c * k + ki) * k + kj) * cols_n;
          for (std::size_t b = 0; b < d.batch; ++b) {
            const double* img = src + (b * d.channels + c) * d.height * d.width;
            for (std::size_t oy = 0; oy < oh; ++oy) {
              const std::ptrdiff_t iy = std::ptrdiff_t(oy * stride + ki) - pad;
              double* dst = row + b * plane + oy * ow;
              if (iy < 0 || iy >= std::ptrdiff_t(d.height)) continue;
              const double* line = img + std::size_t(iy) * d.width;
              for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::ptrdiff_t ix = std::ptrdiff_t(ox * stride + kj) - pad;
                if (ix >= 0 && ix < std::ptrdiff_t(d.width)) dst[ox] = line[ix];
              }
            }
          }
        }
      }
    }
  }

  RowMat out(out_ch, cols_n);
  out.noalias() = ConstMatMap(wv.raw(), out_ch, rows) * ConstMatMap(cols->data(), rows, cols_n);
  Tensor y(image_shape(d, out_ch, oh, ow));
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t o = 0; o < out_ch; ++o) {
      const double* src = out.data() + o * cols_n + b * plane;
      double* dst = y.raw() + (b * out_ch + o) * plane;
      const double bias_v = bv[o];
      for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] + bias_v;
    }
  }

  return g.record(std::move(y), {x, weight, bias}, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    RowMat dout(out_ch, cols_n);
    for (std::size_t b = 0; b < d.batch; ++b) {
      for (std::size_t o = 0; o < out_ch; ++o) {
        const double* src = dy.raw() + (b * out_ch + o) * plane;
        std::copy(src, src + plane, dout.data() + o * cols_n + b * plane);
      }
    }
    ConstMatMap C(cols->data(), rows, cols_n);
    if (gr.requires_grad(weight)) {
      Tensor& dw = gr.grad_buffer(weight);
      MatMap(dw.raw(), out_ch, rows).noalias() += dout * C.transpose();
    }
    if (gr.requires_grad(bias)) {
      Tensor& db = gr.grad_buffer(bias);
      Eigen::Map<Eigen::VectorXd>(db.raw(), out_ch) += dout.rowwise().sum();
    }
    if (gr.requires_grad(x)) {
      RowMat dcols(rows, cols_n);
      dcols.noalias() = ConstMatMap(gr.value(weight).raw(), out_ch, rows).transpose() * dout;
      Tensor& dx = gr.grad_buffer(x);
      for (std::size_t c = 0; c < d.channels; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
          for (std::size_t kj = 0; kj < k; ++kj) {
            const double* row = dcols.data() + ((c * k + ki) * k + kj) * cols_n;
            for (std::size_t b = 0; b < d.batch; ++b) {
              double* img = dx.raw() + (b * d.channels + c) * d.height * d.width;
              for (std::size_t oy = 0; oy < oh; ++oy) {
                const std::ptrdiff_t iy = std::ptrdiff_t(oy * stride + ki) - pad;
                if (iy < 0 || iy >= std::ptrdiff_t(d.height)) continue;
                const double* src = row + b * plane + oy * ow;
                double* line = img + std::size_t(iy) * d.width;
                for (std::size_t ox = 0; ox < ow; ++ox) {
                  const std::ptrdiff_t ix = std::ptrdiff_t(ox * stride + kj) - pad;
                  if (ix >= 0 && ix < std::ptrdiff_t(d.width)) line[ix] += src[ox];
                }
              }
            }
          }
        }
      }
    }
  });
}

Var maxpool2d(Graph& g, Var x, std::size_t window, std::size_t stride) {
  const Tensor& xv = g.value(x);
  const ImageDims d = image_dims("maxpool2d", xv.shape());
  if (window == 0 || stride == 0) throw std::invalid_argument("maxpool2d: window and stride must be positive");
  if (window > d.height || window > d.width) {
    throw std::invalid_argument("maxpool2d: window " + std::to_string(window) + " exceeds input " +
                                shape_string(xv.shape()));
  }
  const std::size_t oh = (d.height - window) / stride + 1, ow = (d.width - window) / stride + 1;
  Tensor y(image_shape(d, d.channels, oh, ow));
  auto argmax = std::make_shared<std::vector<std::size_t>>(y.size());
  const std::size_t planes = d.batch * d.channels;
  for (std::size_t p = 0; p < planes; ++p) {
    const double* img = xv.raw() + p * d.height * d.width;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (oy * stride) * d.width + ox * stride;
        for (std::size_t ki = 0; ki < window; ++ki) {
          for (std::size_t kj = 0; kj < window; ++kj) {
            const std::size_t idx = (oy * stride + ki) * d.width + ox * stride + kj;
            if (img[idx] > img[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        y[o] = img[best];
        (*argmax)[o] = p * d.height * d.width + best;
      }
    }
  }
  return g.record(std::move(y), {x}, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    Tensor& dx = gr.grad_buffer(x);
    for (std::size_t o = 0; o < dy.size(); ++o) dx[(*argmax)[o]] += dy[o];
  });
}

namespace {

struct BatchNormCache {
  std::vector<double> xhat;
  std::vector<double> inv_std;
};

void check_bn_params(const Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& rm,
                     const Tensor& rv, const ChannelView& v) {
  const Shape ch{v.channels};
  if (gamma.shape() != ch) shape_error("batchnorm scale", x.shape(), gamma.shape());
  if (beta.shape() != ch) shape_error("batchnorm shift", x.shape(), beta.shape());
  if (rm.shape() != ch || rv.shape() != ch) shape_error("batchnorm running statistics", x.shape(), rm.shape());
  if (v.outer * v.inner == 0) throw std::invalid_argument("batchnorm: zero-size channel");
}

Var batchnorm_impl(Graph& g, Var x, Var gamma, Var beta, const Tensor& rm, const Tensor& rv, Tensor* rm_out,
                   Tensor* rv_out, Mode mode) {
  const Tensor& xv = g.value(x);
  const Tensor& gv = g.value(gamma);
  const Tensor& bv = g.value(beta);
  const ChannelView v = channel_view(xv.shape());
  check_bn_params(xv, gv, bv, rm, rv, v);
  const std::size_t count = v.outer * v.inner;

  auto cache = std::make_shared<BatchNormCache>();
  cache->xhat.resize(xv.size());
  cache->inv_std.resize(v.channels);
  Tensor y(xv.shape());
  for (std::size_t c = 0; c < v.channels; ++c) {
    double mu = 0.0, var = 0.0;
    if (mode == Mode::kTrain) {
      for (std::size_t o = 0; o < v.outer; ++o) {
        const double* p = xv.raw() + (o * v.channels + c) * v.inner;
        for (std::size_t i = 0; i < v.inner; ++i) mu += p[i];
      }
      mu /= double(count);
      for (std::size_t o = 0; o < v.outer; ++o) {
        const double* p = xv.raw() + (o * v.channels + c) * v.inner;
        for (std::size_t i = 0; i < v.inner; ++i) var += (p[i] - mu) * (p[i] - mu);
      }
      var /= double(count);
    } else {
      mu = rm[c];
      var = rv[c];
    }
    const double inv = 1.0 / std::sqrt(var + kBatchNormEpsilon);
    cache->inv_std[c] = inv;
    for (std::size_t o = 0; o < v.outer; ++o) {
      const std::size_t base = (o * v.channels + c) * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) {
        const double xh = (xv[base + i] - mu) * inv;
        cache->xhat[base + i] = xh;
        y[base + i] = gv[c] * xh + bv[c];
      }
    }
    if (mode == Mode::kTrain) {
      (*rm_out)[c] = kBatchNormMomentum * (*rm_out)[c] + (1.0 - kBatchNormMomentum) * mu;
      (*rv_out)[c] = kBatchNormMomentum * (*rv_out)[c] + (1.0 - kBatchNormMomentum) * var;
    }
  }

  return g.record(std::move(y), {x, gamma, beta}, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    const Tensor& gam = gr.value(gamma);
    const bool need_x = gr.requires_grad(x);
    Tensor* dx = need_x ? &gr.grad_buffer(x) : nullptr;
    Tensor* dg = gr.requires_grad(gamma) ? &gr.grad_buffer(gamma) : nullptr;
    Tensor* db = gr.requires_grad(beta) ? &gr.grad_buffer(beta) : nullptr;
    for (std::size_t c = 0; c < v.channels; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t o = 0; o < v.outer; ++o) {
        const std::size_t base = (o * v.channels + c) * v.inner;
        for (std::size_t i = 0; i < v.inner; ++i) {
          sum_dy += dy[base + i];
          sum_dy_xhat += dy[base + i] * cache->xhat[base + i];
        }
      }
      if (dg) (*dg)[c] += sum_dy_xhat;
      if (db) (*db)[c] += sum_dy;
      if (!dx) continue;
      const double scale = gam[c] * cache->inv_std[c];
      for (std::size_t o = 0; o < v.outer; ++o) {
        const std::size_t base = (o * v.channels + c) * v.inner;
        for (std::size_t i = 0; i < v.inner; ++i) {
          if (mode == Mode::kTrain) {
            (*dx)[base + i] += scale * (dy[base + i] - sum_dy / double(count) -
                                        cache->xhat[base + i] * sum_dy_xhat / double(count));
          } else {
            (*dx)[base + i] += scale * dy[base + i];
          }
        }
      }
    }
  });
}

}  // namespace

Var batchnorm(Graph& g, Var x, Var gamma, Var beta, Tensor& running_mean, Tensor& running_var, Mode mode) {
  return batchnorm_impl(g, x, gamma, beta, running_mean, running_var, &running_mean, &running_var, mode);
}

Var batchnorm(Graph& g, Var x, Var gamma, Var beta, const Tensor& running_mean, const Tensor& running_var) {
  return batchnorm_impl(g, x, gamma, beta, running_mean, running_var, nullptr, nullptr, Mode::kInfer);
}

Var relu(Graph& g, Var x) {
  const Tensor& xv = g.value(x);
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return g.record(std::move(y), {x}, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    const Tensor& in = gr.value(x);
    Tensor& dx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (in[i] > 0.0) dx[i] += dy[i];
    }
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Var softmax(Graph& g, Var x) {
  const Tensor& xv = g.value(x);
  if (xv.rank() == 0) throw std::invalid_argument("softmax: needs at least one axis");
  const std::size_t width = xv.shape().back();
  const std::size_t rows = xv.size() / width;
  Tensor y(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = softmax(std::span<const double>(xv.raw() + r * width, width));
    std::copy(row.begin(), row.end(), y.raw() + r * width);
  }
  return g.record(std::move(y), {x}, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    const Tensor& out = gr.value(yv);
    Tensor& dx = gr.grad_buffer(x);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t i = 0; i < width; ++i) dot += dy[r * width + i] * out[r * width + i];
      for (std::size_t i = 0; i < width; ++i) {
        dx[r * width + i] += out[r * width + i] * (dy[r * width + i] - dot);
      }
    }
  });
}

Var mse_loss(Graph& g, Var pred, const Tensor& target) {
  const Tensor& pv = g.value(pred);
  if (pv.shape() != target.shape()) shape_error("mse_loss", pv.shape(), target.shape());
  const double n = double(pv.size());
  auto diff = std::make_shared<std::vector<double>>(pv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    (*diff)[i] = pv[i] - target[i];
    total += (*diff)[i] * (*diff)[i];
  }
  return g.record(Tensor::scalar(total / n), {pred}, [=](Graph& gr, Var yv) {
    const double up = gr.output_grad(yv)[0];
    Tensor& dp = gr.grad_buffer(pred);
    for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += up * 2.0 * (*diff)[i] / n;
  });
}

Var concat(Graph& g, std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Shape& first = g.value(parts[0]).shape();
  if (first.size() < 2) throw std::invalid_argument("concat: inputs need a batch and a channel axis");
  std::size_t channels = 0;
  std::vector<std::size_t> widths;
  for (Var p : parts) {
    const Shape& s = g.value(p).shape();
    if (s.size() != first.size() || s[0] != first[0] ||
        !std::equal(s.begin() + 2, s.end(), first.begin() + 2)) {
      shape_error("concat", first, s);
    }
    channels += s[1];
    widths.push_back(shape_size(s) / s[0]);
  }
  Shape out_shape = first;
  out_shape[1] = channels;
  const std::size_t batch = first[0];
  Tensor y(out_shape);
  const std::size_t row = y.size() / batch;
  std::vector<Var> inputs(parts.begin(), parts.end());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& pv = g.value(parts[i]);
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(pv.raw() + b * widths[i], widths[i], y.raw() + b * row + offset);
    }
    offset += widths[i];
  }

  return g.record(std::move(y), parts, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    std::size_t off = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (gr.requires_grad(inputs[i])) {
        Tensor& dx = gr.grad_buffer(inputs[i]);
        for (std::size_t b = 0; b < batch; ++b) {
          const double* src = dy.raw() + b * row + off;
          double* dst = dx.raw() + b * widths[i];
          for (std::size_t j = 0; j < widths[i]; ++j) dst[j] += src[j];
        }
      }
      off += widths[i];
    }
  });
}

Var flatten(Graph& g, Var x) {
  const Tensor& xv = g.value(x);
  if (xv.rank() < 1) throw std::invalid_argument("flatten: needs a batch axis");
  const std::size_t batch = xv.dim(0);
  return g.record(xv.reshaped({batch, xv.size() / batch}), {x}, [=](Graph& gr, Var yv) {
    add_into(gr.grad_buffer(x), gr.output_grad(yv));
  });
}

Var gather_columns(Graph& g, Var x, std::span<const std::size_t> index) {
  const Tensor& xv = g.value(x);
  if (xv.rank() != 2 || xv.dim(0) != index.size()) {
    throw std::invalid_argument("gather_columns: input " + shape_string(xv.shape()) + " with " +
                                std::to_string(index.size()) + " indices");
  }
  const std::size_t width = xv.dim(1);
  std::vector<std::size_t> idx(index.begin(), index.end());
  Tensor y({idx.size()});
  for (std::size_t b = 0; b < idx.size(); ++b) {
    if (idx[b] >= width) throw std::out_of_range("gather_columns: index " + std::to_string(idx[b]) + " out of range");
    y[b] = xv[b * width + idx[b]];
  }
  return g.record(std::move(y), {x}, [=](Graph& gr, Var yv) {
    const Tensor& dy = gr.output_grad(yv);
    Tensor& dx = gr.grad_buffer(x);
    for (std::size_t b = 0; b < idx.size(); ++b) dx[b * width + idx[b]] += dy[b];
  });
}

Var mean(Graph& g, Var x) {
  const Tensor& xv = g.value(x);
  double total = 0.0;
  for (double v : xv.data()) total += v;
  const double n = double(xv.size());
  return g.record(Tensor::scalar(total / n), {x}, [=](Graph& gr, Var yv) {
    const double up = gr.output_grad(yv)[0];
    Tensor& dx = gr.grad_buffer(x);
    for (double& v : dx.data()) v += up / n;
  });
}

Var weighted_sum(Graph& g, Var x, const Tensor& weights) {
  const Tensor& xv = g.value(x);
  if (xv.shape() != weights.shape()) shape_error("weighted_sum", xv.shape(), weights.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i] * weights[i];
  return g.record(Tensor::scalar(total), {x}, [=](Graph& gr, Var yv) {
    const double up = gr.output_grad(yv)[0];
    Tensor& dx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up * weights[i];
  });
}

}  // namespace graspq::tensornet
