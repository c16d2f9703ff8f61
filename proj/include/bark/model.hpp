#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bark/data_pipeline.hpp"
#include "bark/nn.hpp"

namespace bark {

// Two strided conv blocks (conv -> batchnorm -> relu), global average pooling
// and a five-way dense softmax head.
struct BarkNetConfig {
  std::size_t fragment_len = kDefaultFragmentLen;
  std::size_t conv1_channels = 16;
  std::size_t conv1_kernel = 64;
  std::size_t conv1_stride = 8;
  std::size_t conv2_channels = 32;
  std::size_t conv2_kernel = 32;
  std::size_t conv2_stride = 4;
  std::uint64_t seed = 0;

  static constexpr std::size_t kOutputs = kNumClasses;

  std::size_t conv1_out_len() const;
  std::size_t conv2_out_len() const;
  // Throws Error{kBadConfig} when either conv output would be empty.
  void validate() const;
};

struct BarkNet {
  BarkNetConfig config;
  Conv1dLayer conv1;
  BatchNorm1dLayer bn1;
  Conv1dLayer conv2;
  BatchNorm1dLayer bn2;
  DenseLayer head;

  // Trainable tensors in checkpoint order (running statistics excluded).
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
};

struct BarkNetGrads {
  Tensor conv1_w, conv1_b, bn1_gamma, bn1_beta;
  Tensor conv2_w, conv2_b, bn2_gamma, bn2_beta;
  Tensor head_w, head_b;
  Tensor input;  // d loss / d input batch

  // Same order as BarkNet::parameters().
  std::vector<const Tensor*> list() const;
};

struct ForwardCache {
  Tensor input;
  Tensor conv1_out;
  BatchNormCache bn1;
  Tensor bn1_out;
  Tensor act1;
  Tensor conv2_out;
  BatchNormCache bn2;
  Tensor bn2_out;
  Tensor act2;
  Tensor pooled;
  Tensor probs;
};

// He-initialised from cfg.seed. Throws Error{kBadConfig}.
BarkNet init_barknet(const BarkNetConfig& cfg);

// batch: [batch, 1, fragment_len] -> probabilities [batch, 5].
// Train mode updates batchnorm running statistics; pass a cache to backprop.
Tensor forward(BarkNet& net, const Tensor& batch, Mode mode, ForwardCache* cache = nullptr);
Tensor infer(const BarkNet& net, const Tensor& batch);

BarkNetGrads backward(const BarkNet& net, const ForwardCache& cache,
                      std::span<const int> labels);

struct LossAndGrads {
  double loss = 0.0;
  Tensor probs;
  BarkNetGrads grads;
};

// Train-mode forward, softmax cross-entropy and full backward pass.
LossAndGrads loss_and_gradients(BarkNet& net, const Tensor& batch,
                                std::span<const int> labels);

// Stacks fragments into [n, 1, len], peak-normalising each one.
Tensor make_input_batch(std::span<const std::vector<double>* const> fragments);
Tensor make_input_batch(std::span<const LabeledFragment* const> items);

struct Prediction {
  EmotionClass label;
  std::array<double, kNumClasses> confidences;
};

// Argmax of the infer-mode output; ties go to the lowest ordinal.
EmotionClass argmax_class(std::span<const double> probs);
Prediction predict(const BarkNet& net, const Fragment& fragment);

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: "BARK1", u32 version, ten u32 config words (fragment_len,
// conv1 channels/kernel/stride, conv2 channels/kernel/stride, outputs,
// seed low, seed high), then f64 values: conv1 w,b; bn1 gamma, beta,
// running mean, running var; conv2 w,b; bn2 (same four); dense w,b.
// Everything little-endian.
std::vector<std::uint8_t> save_checkpoint(const BarkNet& net);
// Throws Error{kBadMagic, kVersionMismatch, kTruncated, kBadConfig}.
BarkNet load_checkpoint(std::span<const std::uint8_t> bytes);

}  // namespace bark
