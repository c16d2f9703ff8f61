#include "bark/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bark/error.hpp"

namespace bark {
namespace {

[[noreturn]] void shape_error(const std::string& msg) {
  throw Error(ErrorCode::kShapeMismatch, msg);
}

// Weights reordered to [in_channels][kernel_len][out_channels] so the inner
// loops run over contiguous output channels.
std::vector<double> transpose_conv_weights(const Conv1dLayer& layer) {
  const std::size_t out_ch = layer.out_channels();
  const std::size_t in_ch = layer.in_channels();
  const std::size_t k = layer.kernel_len();
  std::vector<double> wt(out_ch * in_ch * k);
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t c = 0; c < in_ch; ++c) {
      for (std::size_t j = 0; j < k; ++j) {
        wt[(c * k + j) * out_ch + o] = layer.weights.at(o, c, j);
      }
    }
  }
  return wt;
}

void check_conv_input(const Conv1dLayer& layer, const Tensor& x) {
  require_rank(x, 3, "conv1d");
  if (x.dim(1) != layer.in_channels()) {
    shape_error("conv1d expects " + std::to_string(layer.in_channels()) +
                " input channels, got " + std::to_string(x.dim(1)));
  }
  if (x.dim(2) < layer.kernel_len()) {
    shape_error("conv1d input length " + std::to_string(x.dim(2)) +
                " shorter than kernel " + std::to_string(layer.kernel_len()));
  }
}

}  // namespace

Conv1dLayer Conv1dLayer::zeros(std::size_t in_channels, std::size_t out_channels,
                               std::size_t kernel_len, std::size_t stride) {
  if (in_channels == 0 || out_channels == 0 || kernel_len == 0 || stride == 0) {
    throw Error(ErrorCode::kBadConfig, "conv1d dimensions must be positive");
  }
  return {Tensor({out_channels, in_channels, kernel_len}), Tensor({out_channels}), stride};
}

std::size_t conv1d_output_length(std::size_t len, std::size_t kernel_len,
                                 std::size_t stride) {
  if (kernel_len == 0 || stride == 0 || len < kernel_len) return 0;
  return (len - kernel_len) / stride + 1;
}

Tensor conv1d_forward(const Conv1dLayer& layer, const Tensor& x) {
  check_conv_input(layer, x);
  const std::size_t batch = x.dim(0);
  const std::size_t in_ch = layer.in_channels();
  const std::size_t out_ch = layer.out_channels();
  const std::size_t k = layer.kernel_len();
  const std::size_t len = x.dim(2);
  const std::size_t stride = layer.stride;
  const std::size_t out_len = conv1d_output_length(len, k, stride);

  const auto wt = transpose_conv_weights(layer);
  Tensor y({batch, out_ch, out_len});
  std::vector<double> acc(out_ch);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.data() + b * in_ch * len;
    double* yb = y.data() + b * out_ch * out_len;
    for (std::size_t t = 0; t < out_len; ++t) {
      std::copy(layer.bias.data(), layer.bias.data() + out_ch, acc.begin());
      for (std::size_t c = 0; c < in_ch; ++c) {
        const double* xs = xb + c * len + t * stride;
        const double* wc = wt.data() + c * k * out_ch;
        for (std::size_t j = 0; j < k; ++j) {
          const double xv = xs[j];
          const double* wj = wc + j * out_ch;
          for (std::size_t o = 0; o < out_ch; ++o) acc[o] += wj[o] * xv;
        }
      }
      for (std::size_t o = 0; o < out_ch; ++o) yb[o * out_len + t] = acc[o];
    }
  }
  return y;
}

Conv1dGrads conv1d_backward(const Conv1dLayer& layer, const Tensor& x,
                            const Tensor& grad_out, bool need_grad_x) {
  check_conv_input(layer, x);
  const std::size_t batch = x.dim(0);
  const std::size_t in_ch = layer.in_channels();
  const std::size_t out_ch = layer.out_channels();
  const std::size_t k = layer.kernel_len();
  const std::size_t len = x.dim(2);
  const std::size_t stride = layer.stride;
  const std::size_t out_len = conv1d_output_length(len, k, stride);
  if (grad_out.shape() != std::vector<std::size_t>{batch, out_ch, out_len}) {
    shape_error("conv1d grad_out has shape " + shape_string(grad_out.shape()));
  }

  const auto wt = transpose_conv_weights(layer);
  std::vector<double> gwt(in_ch * k * out_ch, 0.0);
  Conv1dGrads grads;
  grads.grad_b = Tensor({out_ch});
  if (need_grad_x) grads.grad_x = Tensor({batch, in_ch, len});

  std::vector<double> g(out_ch);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.data() + b * in_ch * len;
    const double* gb = grad_out.data() + b * out_ch * out_len;
    double* gxb = need_grad_x ? grads.grad_x.data() + b * in_ch * len : nullptr;
    for (std::size_t t = 0; t < out_len; ++t) {
      for (std::size_t o = 0; o < out_ch; ++o) {
        g[o] = gb[o * out_len + t];
        grads.grad_b[o] += g[o];
      }
      for (std::size_t c = 0; c < in_ch; ++c) {
        const double* xs = xb + c * len + t * stride;
        double* gw = gwt.data() + c * k * out_ch;
        for (std::size_t j = 0; j < k; ++j) {
          const double xv = xs[j];
          double* gwj = gw + j * out_ch;
          for (std::size_t o = 0; o < out_ch; ++o) gwj[o] += g[o] * xv;
        }
        if (gxb != nullptr) {
          double* gxs = gxb + c * len + t * stride;
          const double* wc = wt.data() + c * k * out_ch;
          for (std::size_t j = 0; j < k; ++j) {
            const double* wj = wc + j * out_ch;
            double s = 0.0;
            for (std::size_t o = 0; o < out_ch; ++o) s += wj[o] * g[o];
            gxs[j] += s;
          }
        }
      }
    }
  }

  grads.grad_w = Tensor({out_ch, in_ch, k});
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t c = 0; c < in_ch; ++c) {
      for (std::size_t j = 0; j < k; ++j) {
        grads.grad_w.at(o, c, j) = gwt[(c * k + j) * out_ch + o];
      }
    }
  }
  return grads;
}

BatchNorm1dLayer BatchNorm1dLayer::identity(std::size_t channels) {
  BatchNorm1dLayer layer;
  layer.gamma = Tensor({channels}, 1.0);
  layer.beta = Tensor({channels}, 0.0);
  layer.running_mean = Tensor({channels}, 0.0);
  layer.running_var = Tensor({channels}, 1.0);
  return layer;
}

namespace {

void check_bn_input(const BatchNorm1dLayer& layer, const Tensor& x) {
  require_rank(x, 3, "batchnorm");
  if (x.dim(1) != layer.channels()) {
    shape_error("batchnorm expects " + std::to_string(layer.channels()) +
                " channels, got " + std::to_string(x.dim(1)));
  }
}

}  // namespace

Tensor batchnorm_infer(const BatchNorm1dLayer& layer, const Tensor& x) {
  check_bn_input(layer, x);
  const std::size_t batch = x.dim(0);
  const std::size_t ch = x.dim(1);
  const std::size_t len = x.dim(2);
  Tensor y(x.shape());
  for (std::size_t c = 0; c < ch; ++c) {
    const double inv_std = 1.0 / std::sqrt(layer.running_var[c] + layer.epsilon);
    const double scale = layer.gamma[c] * inv_std;
    const double mean = layer.running_mean[c];
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xs = x.data() + (b * ch + c) * len;
      double* ys = y.data() + (b * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) ys[t] = scale * (xs[t] - mean) + layer.beta[c];
    }
  }
  return y;
}

Tensor batchnorm_forward(BatchNorm1dLayer& layer, const Tensor& x, Mode mode,
                         BatchNormCache* cache) {
  if (mode == Mode::kInfer) return batchnorm_infer(layer, x);
  check_bn_input(layer, x);
  const std::size_t batch = x.dim(0);
  const std::size_t ch = x.dim(1);
  const std::size_t len = x.dim(2);

  Tensor y(x.shape());
  const std::size_t count = batch * len;
  if (count < 2) {
    throw Error(ErrorCode::kDegenerateBatch,
                "train-mode batchnorm needs batch*len >= 2, got " + std::to_string(count));
  }
  if (cache != nullptr) {
    cache->x_hat = Tensor(x.shape());
    cache->inv_std.assign(ch, 0.0);
  }
  const double n = static_cast<double>(count);
  for (std::size_t c = 0; c < ch; ++c) {
    double sum = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xs = x.data() + (b * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) sum += xs[t];
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xs = x.data() + (b * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        const double d = xs[t] - mean;
        sq += d * d;
      }
    }
    const double var = sq / n;
    const double inv_std = 1.0 / std::sqrt(var + layer.epsilon);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xs = x.data() + (b * ch + c) * len;
      double* ys = y.data() + (b * ch + c) * len;
      double* hs = cache != nullptr ? cache->x_hat.data() + (b * ch + c) * len : nullptr;
      for (std::size_t t = 0; t < len; ++t) {
        const double h = (xs[t] - mean) * inv_std;
        if (hs != nullptr) hs[t] = h;
        ys[t] = layer.gamma[c] * h + layer.beta[c];
      }
    }
    if (cache != nullptr) cache->inv_std[c] = inv_std;
    layer.running_mean[c] = (1.0 - layer.momentum) * layer.running_mean[c] + layer.momentum * mean;
    layer.running_var[c] = (1.0 - layer.momentum) * layer.running_var[c] + layer.momentum * var;
  }
  return y;
}

BatchNormGrads batchnorm_backward(const BatchNorm1dLayer& layer,
                                  const BatchNormCache& cache,
                                  const Tensor& grad_out) {
  if (!grad_out.same_shape(cache.x_hat)) {
    shape_error("batchnorm grad_out has shape " + shape_string(grad_out.shape()));
  }
  const std::size_t batch = grad_out.dim(0);
  const std::size_t ch = grad_out.dim(1);
  const std::size_t len = grad_out.dim(2);
  const double n = static_cast<double>(batch * len);

  BatchNormGrads grads{Tensor(grad_out.shape()), Tensor({ch}), Tensor({ch})};
  for (std::size_t c = 0; c < ch; ++c) {
    double sum_g = 0.0;
    double sum_gh = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        sum_g += grad_out[off + t];
        sum_gh += grad_out[off + t] * cache.x_hat[off + t];
      }
    }
    grads.grad_beta[c] = sum_g;
    grads.grad_gamma[c] = sum_gh;
    // dx = gamma * inv_std / n * (n*g - sum(g) - x_hat * sum(g*x_hat))
    const double scale = layer.gamma[c] * cache.inv_std[c] / n;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * ch + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        grads.grad_x[off + t] =
            scale * (n * grad_out[off + t] - sum_g - cache.x_hat[off + t] * sum_gh);
      }
    }
  }
  return grads;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (!x.same_shape(grad_out)) shape_error("relu_backward shape mismatch");
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > 0.0 ? grad_out[i] : 0.0;
  return g;
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 3, "global_avg_pool");
  const std::size_t batch = x.dim(0);
  const std::size_t ch = x.dim(1);
  const std::size_t len = x.dim(2);
  if (len == 0) shape_error("global_avg_pool over an empty time axis");
  Tensor y({batch, ch});
  for (std::size_t r = 0; r < batch * ch; ++r) {
    double s = 0.0;
    for (std::size_t t = 0; t < len; ++t) s += x[r * len + t];
    y[r] = s / static_cast<double>(len);
  }
  return y;
}

Tensor global_avg_pool_backward(const Tensor& grad_out, std::size_t len) {
  require_rank(grad_out, 2, "global_avg_pool_backward");
  if (len == 0) shape_error("global_avg_pool_backward with len 0");
  Tensor g({grad_out.dim(0), grad_out.dim(1), len});
  for (std::size_t r = 0; r < grad_out.size(); ++r) {
    const double v = grad_out[r] / static_cast<double>(len);
    for (std::size_t t = 0; t < len; ++t) g[r * len + t] = v;
  }
  return g;
}

DenseLayer DenseLayer::zeros(std::size_t in_features, std::size_t out_features) {
  if (in_features == 0 || out_features == 0) {
    throw Error(ErrorCode::kBadConfig, "dense dimensions must be positive");
  }
  return {Tensor({out_features, in_features}), Tensor({out_features})};
}

Tensor dense_forward(const DenseLayer& layer, const Tensor& x) {
  require_rank(x, 2, "dense");
  if (x.dim(1) != layer.in_features()) {
    shape_error("dense expects " + std::to_string(layer.in_features()) +
                " features, got " + std::to_string(x.dim(1)));
  }
  const std::size_t batch = x.dim(0);
  const std::size_t in = layer.in_features();
  const std::size_t out = layer.out_features();
  Tensor y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) {
      double s = layer.bias[o];
      for (std::size_t i = 0; i < in; ++i) s += layer.weights.at(o, i) * x.at(b, i);
      y.at(b, o) = s;
    }
  }
  return y;
}

DenseGrads dense_backward(const DenseLayer& layer, const Tensor& x,
                          const Tensor& grad_out) {
  require_rank(x, 2, "dense_backward");
  const std::size_t batch = x.dim(0);
  const std::size_t in = layer.in_features();
  const std::size_t out = layer.out_features();
  if (x.dim(1) != in || grad_out.shape() != std::vector<std::size_t>{batch, out}) {
    shape_error("dense_backward shape mismatch");
  }
  DenseGrads grads{Tensor({batch, in}), Tensor({out, in}), Tensor({out})};
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) {
      const double g = grad_out.at(b, o);
      grads.grad_b[o] += g;
      for (std::size_t i = 0; i < in; ++i) {
        grads.grad_w.at(o, i) += g * x.at(b, i);
        grads.grad_x.at(b, i) += g * layer.weights.at(o, i);
      }
    }
  }
  return grads;
}

Tensor softmax(const Tensor& logits) {
  require_rank(logits, 2, "softmax");
  const std::size_t batch = logits.dim(0);
  const std::size_t k = logits.dim(1);
  Tensor p(logits.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    double mx = logits.at(b, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits.at(b, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p.at(b, j) = std::exp(logits.at(b, j) - mx);
      sum += p.at(b, j);
    }
    for (std::size_t j = 0; j < k; ++j) p.at(b, j) /= sum;
  }
  return p;
}

namespace {

void check_labels(const Tensor& probs, std::span<const int> labels) {
  require_rank(probs, 2, "cross_entropy");
  if (labels.size() != probs.dim(0)) {
    shape_error("cross_entropy has " + std::to_string(labels.size()) +
                " labels for batch " + std::to_string(probs.dim(0)));
  }
  if (labels.empty()) shape_error("cross_entropy on an empty batch");
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.dim(1)) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(label));
    }
  }
}

}  // namespace

double cross_entropy(const Tensor& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  double loss = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    loss -= std::log(std::max(probs.at(b, static_cast<std::size_t>(labels[b])), 1e-12));
  }
  return loss / static_cast<double>(labels.size());
}

Tensor softmax_cross_entropy_grad(const Tensor& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  const double inv_batch = 1.0 / static_cast<double>(labels.size());
  Tensor g(probs.shape());
  for (std::size_t b = 0; b < labels.size(); ++b) {
    for (std::size_t j = 0; j < probs.dim(1); ++j) {
      const double target = static_cast<int>(j) == labels[b] ? 1.0 : 0.0;
      g.at(b, j) = (probs.at(b, j) - target) * inv_batch;
    }
  }
  return g;
}

void he_init(Tensor& weights, std::size_t fan_in, SeededRng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& w : weights.values()) w = rng.normal(0.0, stddev);
}

}  // namespace bark
