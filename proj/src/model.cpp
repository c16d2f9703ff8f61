#include "bark/model.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "bark/error.hpp"

namespace bark {

std::size_t BarkNetConfig::conv1_out_len() const {
  return conv1d_output_length(fragment_len, conv1_kernel, conv1_stride);
}

std::size_t BarkNetConfig::conv2_out_len() const {
  return conv1d_output_length(conv1_out_len(), conv2_kernel, conv2_stride);
}

void BarkNetConfig::validate() const {
  if (conv1_channels == 0 || conv2_channels == 0 || conv1_kernel == 0 ||
      conv2_kernel == 0 || conv1_stride == 0 || conv2_stride == 0) {
    throw Error(ErrorCode::kBadConfig, "all conv dimensions must be positive");
  }
  if (conv1_out_len() < 1) {
    throw Error(ErrorCode::kBadConfig,
                "fragment_len " + std::to_string(fragment_len) +
                    " is shorter than conv1 kernel " + std::to_string(conv1_kernel));
  }
  if (conv2_out_len() < 1) {
    throw Error(ErrorCode::kBadConfig,
                "conv1 output length " + std::to_string(conv1_out_len()) +
                    " is shorter than conv2 kernel " + std::to_string(conv2_kernel));
  }
}

std::vector<Tensor*> BarkNet::parameters() {
  return {&conv1.weights, &conv1.bias, &bn1.gamma, &bn1.beta,
          &conv2.weights, &conv2.bias, &bn2.gamma, &bn2.beta,
          &head.weights,  &head.bias};
}

std::vector<const Tensor*> BarkNet::parameters() const {
  return {&conv1.weights, &conv1.bias, &bn1.gamma, &bn1.beta,
          &conv2.weights, &conv2.bias, &bn2.gamma, &bn2.beta,
          &head.weights,  &head.bias};
}

std::vector<const Tensor*> BarkNetGrads::list() const {
  return {&conv1_w, &conv1_b, &bn1_gamma, &bn1_beta, &conv2_w,
          &conv2_b, &bn2_gamma, &bn2_beta, &head_w,   &head_b};
}

BarkNet init_barknet(const BarkNetConfig& cfg) {
  cfg.validate();
  BarkNet net;
  net.config = cfg;
  net.conv1 = Conv1dLayer::zeros(1, cfg.conv1_channels, cfg.conv1_kernel, cfg.conv1_stride);
  net.bn1 = BatchNorm1dLayer::identity(cfg.conv1_channels);
  net.conv2 = Conv1dLayer::zeros(cfg.conv1_channels, cfg.conv2_channels, cfg.conv2_kernel,
                                 cfg.conv2_stride);
  net.bn2 = BatchNorm1dLayer::identity(cfg.conv2_channels);
  net.head = DenseLayer::zeros(cfg.conv2_channels, BarkNetConfig::kOutputs);

  SeededRng rng(cfg.seed);
  he_init(net.conv1.weights, cfg.conv1_kernel, rng);
  he_init(net.conv2.weights, cfg.conv1_channels * cfg.conv2_kernel, rng);
  he_init(net.head.weights, cfg.conv2_channels, rng);
  return net;
}

namespace {

void check_input(const BarkNetConfig& cfg, const Tensor& batch) {
  require_rank(batch, 3, "BarkNet input");
  if (batch.dim(1) != 1 || batch.dim(2) != cfg.fragment_len) {
    throw Error(ErrorCode::kShapeMismatch,
                "BarkNet expects [batch, 1, " + std::to_string(cfg.fragment_len) +
                    "], got " + shape_string(batch.shape()));
  }
}

}  // namespace

Tensor forward(BarkNet& net, const Tensor& batch, Mode mode, ForwardCache* cache) {
  if (mode == Mode::kInfer) {
    Tensor probs = infer(net, batch);
    if (cache != nullptr) cache->probs = probs;
    return probs;
  }
  check_input(net.config, batch);
  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.input = batch;
  c.conv1_out = conv1d_forward(net.conv1, batch);
  c.bn1_out = batchnorm_forward(net.bn1, c.conv1_out, Mode::kTrain, &c.bn1);
  c.act1 = relu(c.bn1_out);
  c.conv2_out = conv1d_forward(net.conv2, c.act1);
  c.bn2_out = batchnorm_forward(net.bn2, c.conv2_out, Mode::kTrain, &c.bn2);
  c.act2 = relu(c.bn2_out);
  c.pooled = global_avg_pool(c.act2);
  c.probs = softmax(dense_forward(net.head, c.pooled));
  return c.probs;
}

Tensor infer(const BarkNet& net, const Tensor& batch) {
  check_input(net.config, batch);
  Tensor h = relu(batchnorm_infer(net.bn1, conv1d_forward(net.conv1, batch)));
  h = relu(batchnorm_infer(net.bn2, conv1d_forward(net.conv2, h)));
  return softmax(dense_forward(net.head, global_avg_pool(h)));
}

BarkNetGrads backward(const BarkNet& net, const ForwardCache& cache,
                      std::span<const int> labels) {
  BarkNetGrads g;
  const Tensor d_logits = softmax_cross_entropy_grad(cache.probs, labels);
  DenseGrads dense = dense_backward(net.head, cache.pooled, d_logits);
  g.head_w = std::move(dense.grad_w);
  g.head_b = std::move(dense.grad_b);

  Tensor d = global_avg_pool_backward(dense.grad_x, cache.act2.dim(2));
  d = relu_backward(cache.bn2_out, d);
  BatchNormGrads bn2 = batchnorm_backward(net.bn2, cache.bn2, d);
  g.bn2_gamma = std::move(bn2.grad_gamma);
  g.bn2_beta = std::move(bn2.grad_beta);
  Conv1dGrads conv2 = conv1d_backward(net.conv2, cache.act1, bn2.grad_x);
  g.conv2_w = std::move(conv2.grad_w);
  g.conv2_b = std::move(conv2.grad_b);

  d = relu_backward(cache.bn1_out, conv2.grad_x);
  BatchNormGrads bn1 = batchnorm_backward(net.bn1, cache.bn1, d);
  g.bn1_gamma = std::move(bn1.grad_gamma);
  g.bn1_beta = std::move(bn1.grad_beta);
  Conv1dGrads conv1 = conv1d_backward(net.conv1, cache.input, bn1.grad_x);
  g.conv1_w = std::move(conv1.grad_w);
  g.conv1_b = std::move(conv1.grad_b);
  g.input = std::move(conv1.grad_x);
  return g;
}

LossAndGrads loss_and_gradients(BarkNet& net, const Tensor& batch,
                                std::span<const int> labels) {
  ForwardCache cache;
  LossAndGrads out;
  out.probs = forward(net, batch, Mode::kTrain, &cache);
  out.loss = cross_entropy(out.probs, labels);
  out.grads = backward(net, cache, labels);
  return out;
}

Tensor make_input_batch(std::span<const std::vector<double>* const> fragments) {
  if (fragments.empty()) throw Error(ErrorCode::kEmpty, "no fragments to batch");
  const std::size_t len = fragments.front()->size();
  Tensor batch({fragments.size(), 1, len});
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (fragments[i]->size() != len) {
      throw Error(ErrorCode::kShapeMismatch, "fragments of different lengths in one batch");
    }
    std::vector<double> samples = *fragments[i];
    peak_normalize(samples);
    std::copy(samples.begin(), samples.end(), batch.data() + i * len);
  }
  return batch;
}

Tensor make_input_batch(std::span<const LabeledFragment* const> items) {
  std::vector<const std::vector<double>*> ptrs;
  ptrs.reserve(items.size());
  for (const auto* item : items) ptrs.push_back(&item->fragment.samples);
  return make_input_batch(ptrs);
}

EmotionClass argmax_class(std::span<const double> probs) {
  if (probs.size() != kNumClasses) {
    throw Error(ErrorCode::kShapeMismatch, "expected 5 class scores");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<EmotionClass>(best);
}

Prediction predict(const BarkNet& net, const Fragment& fragment) {
  if (fragment.samples.size() != net.config.fragment_len) {
    throw Error(ErrorCode::kShapeMismatch,
                "fragment has " + std::to_string(fragment.samples.size()) +
                    " samples, model expects " + std::to_string(net.config.fragment_len));
  }
  const std::vector<const std::vector<double>*> one = {&fragment.samples};
  const Tensor probs = infer(net, make_input_batch(one));
  Prediction p{};
  std::copy(probs.data(), probs.data() + kNumClasses, p.confidences.begin());
  p.label = argmax_class(p.confidences);
  return p;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[5] = {'B', 'A', 'R', 'K', '1'};
constexpr std::size_t kConfigWords = 10;
constexpr std::size_t kHeaderSize = sizeof(kMagic) + 4 + 4 * kConfigWords;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int shift = 0; shift < 64; shift += 8) out.push_back(static_cast<std::uint8_t>(bits >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

double get_f64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return std::bit_cast<double>(v);
}

std::uint32_t narrow(std::size_t v) {
  if (v > 0xFFFFFFFFu) throw Error(ErrorCode::kBadConfig, "config value exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

// Every serialised tensor, checkpoint order.
template <typename Net>
auto serialised_tensors(Net& net) {
  return std::array{&net.conv1.weights,     &net.conv1.bias,        &net.bn1.gamma,
                    &net.bn1.beta,          &net.bn1.running_mean,  &net.bn1.running_var,
                    &net.conv2.weights,     &net.conv2.bias,        &net.bn2.gamma,
                    &net.bn2.beta,          &net.bn2.running_mean,  &net.bn2.running_var,
                    &net.head.weights,      &net.head.bias};
}

}  // namespace

std::vector<std::uint8_t> save_checkpoint(const BarkNet& net) {
  const auto& cfg = net.config;
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, narrow(cfg.fragment_len));
  put_u32(out, narrow(cfg.conv1_channels));
  put_u32(out, narrow(cfg.conv1_kernel));
  put_u32(out, narrow(cfg.conv1_stride));
  put_u32(out, narrow(cfg.conv2_channels));
  put_u32(out, narrow(cfg.conv2_kernel));
  put_u32(out, narrow(cfg.conv2_stride));
  put_u32(out, narrow(BarkNetConfig::kOutputs));
  put_u32(out, static_cast<std::uint32_t>(cfg.seed & 0xFFFFFFFFu));
  put_u32(out, static_cast<std::uint32_t>(cfg.seed >> 32));
  for (const Tensor* t : serialised_tensors(net)) {
    for (double v : t->values()) put_f64(out, v);
  }
  return out;
}

BarkNet load_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kBadMagic, "checkpoint does not start with BARK1");
  }
  if (bytes.size() < sizeof(kMagic) + 4) {
    throw Error(ErrorCode::kTruncated, "checkpoint ends inside the version field");
  }
  const std::uint32_t version = get_u32(bytes, sizeof(kMagic));
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "checkpoint version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorCode::kTruncated, "checkpoint ends inside the config block");
  }

  std::array<std::uint32_t, kConfigWords> words{};
  for (std::size_t i = 0; i < kConfigWords; ++i) {
    words[i] = get_u32(bytes, sizeof(kMagic) + 4 + 4 * i);
  }
  BarkNetConfig cfg;
  cfg.fragment_len = words[0];
  cfg.conv1_channels = words[1];
  cfg.conv1_kernel = words[2];
  cfg.conv1_stride = words[3];
  cfg.conv2_channels = words[4];
  cfg.conv2_kernel = words[5];
  cfg.conv2_stride = words[6];
  if (words[7] != BarkNetConfig::kOutputs) {
    throw Error(ErrorCode::kBadConfig, "checkpoint head has " + std::to_string(words[7]) +
                                           " outputs, expected 5");
  }
  cfg.seed = static_cast<std::uint64_t>(words[8]) | (static_cast<std::uint64_t>(words[9]) << 32);

  cfg.validate();
  const std::uint64_t c1 = cfg.conv1_channels;
  const std::uint64_t c2 = cfg.conv2_channels;
  const std::uint64_t value_count = c1 * cfg.conv1_kernel + c1 + 4 * c1 +
                                    c2 * c1 * cfg.conv2_kernel + c2 + 4 * c2 +
                                    BarkNetConfig::kOutputs * c2 + BarkNetConfig::kOutputs;
  const std::uint64_t expected = kHeaderSize + 8 * value_count;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::kTruncated, "checkpoint has " + std::to_string(bytes.size()) +
                                           " bytes, expected " + std::to_string(expected));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::kBadConfig, "checkpoint has " +
                                           std::to_string(bytes.size() - expected) +
                                           " trailing bytes");
  }

  BarkNet net = init_barknet(cfg);
  std::size_t pos = kHeaderSize;
  for (Tensor* t : serialised_tensors(net)) {
    for (double& v : t->values()) {
      v = get_f64(bytes, pos);
      pos += 8;
    }
  }
  return net;
}

}  // namespace bark
