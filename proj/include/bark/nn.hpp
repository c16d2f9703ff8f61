#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bark/rng.hpp"
#include "bark/tensor.hpp"

namespace bark {

enum class Mode { kTrain, kInfer };

// ---------------------------------------------------------------------------
// 1-D convolution (cross-correlation, valid padding).
// x: [batch, in_channels, len] -> y: [batch, out_channels, out_len]
// ---------------------------------------------------------------------------

struct Conv1dLayer {
  Tensor weights;  // [out_channels, in_channels, kernel_len]
  Tensor bias;     // [out_channels]
  std::size_t stride = 1;

  static Conv1dLayer zeros(std::size_t in_channels, std::size_t out_channels,
                           std::size_t kernel_len, std::size_t stride);

  std::size_t out_channels() const { return weights.dim(0); }
  std::size_t in_channels() const { return weights.dim(1); }
  std::size_t kernel_len() const { return weights.dim(2); }
};

struct Conv1dGrads {
  Tensor grad_x;  // empty when not requested
  Tensor grad_w;
  Tensor grad_b;
};

// floor((len - kernel_len) / stride) + 1, or 0 when the kernel does not fit.
std::size_t conv1d_output_length(std::size_t len, std::size_t kernel_len,
                                 std::size_t stride);

Tensor conv1d_forward(const Conv1dLayer& layer, const Tensor& x);
Conv1dGrads conv1d_backward(const Conv1dLayer& layer, const Tensor& x,
                            const Tensor& grad_out, bool need_grad_x = true);

// ---------------------------------------------------------------------------
// Batch normalization over [batch, channels, len]; statistics are per channel
// over batch x time.
// ---------------------------------------------------------------------------

struct BatchNorm1dLayer {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  double epsilon = 1e-5;
  double momentum = 0.1;

  static BatchNorm1dLayer identity(std::size_t channels);

  std::size_t channels() const { return gamma.size(); }
};

struct BatchNormCache {
  Tensor x_hat;
  std::vector<double> inv_std;
};

struct BatchNormGrads {
  Tensor grad_x;
  Tensor grad_gamma;
  Tensor grad_beta;
};

// Train mode uses population statistics of the batch and updates the running
// statistics in place; infer mode reads them. `cache` is filled in train mode.
// Throws Error{kDegenerateBatch} when batch*len < 2 in train mode.
Tensor batchnorm_forward(BatchNorm1dLayer& layer, const Tensor& x, Mode mode,
                         BatchNormCache* cache = nullptr);
// Inference-mode normalisation with the running statistics; never mutates.
Tensor batchnorm_infer(const BatchNorm1dLayer& layer, const Tensor& x);
BatchNormGrads batchnorm_backward(const BatchNorm1dLayer& layer,
                                  const BatchNormCache& cache,
                                  const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Elementwise and pooling.
// ---------------------------------------------------------------------------

Tensor relu(const Tensor& x);
// Subgradient at exactly 0 is 0.
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

// [batch, ch, len] -> [batch, ch]
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& grad_out, std::size_t len);

// ---------------------------------------------------------------------------
// Fully connected.
// ---------------------------------------------------------------------------

struct DenseLayer {
  Tensor weights;  // [out_features, in_features]
  Tensor bias;     // [out_features]

  static DenseLayer zeros(std::size_t in_features, std::size_t out_features);

  std::size_t out_features() const { return weights.dim(0); }
  std::size_t in_features() const { return weights.dim(1); }
};

struct DenseGrads {
  Tensor grad_x;
  Tensor grad_w;
  Tensor grad_b;
};

Tensor dense_forward(const DenseLayer& layer, const Tensor& x);
DenseGrads dense_backward(const DenseLayer& layer, const Tensor& x,
                          const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Output head.
// ---------------------------------------------------------------------------

// Row-wise, stabilised by subtracting the row maximum.
Tensor softmax(const Tensor& logits);

// Mean over the batch of -log(max(p[label], 1e-12)).
// Throws Error{kLabelOutOfRange, kShapeMismatch}.
double cross_entropy(const Tensor& probs, std::span<const int> labels);

// d(cross_entropy(softmax(z)))/dz = (probs - one_hot) / batch.
Tensor softmax_cross_entropy_grad(const Tensor& probs, std::span<const int> labels);

// He normal initialisation: N(0, 2 / fan_in).
void he_init(Tensor& weights, std::size_t fan_in, SeededRng& rng);

}  // namespace bark
