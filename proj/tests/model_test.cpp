#include "bark/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "bark/error.hpp"
#include "test_util.hpp"

namespace bark {
namespace {

using testing::micro_config;
using testing::random_tensor;

TEST(BarkNetConfigTest, DefaultShapeChain) {
  const BarkNetConfig cfg;
  EXPECT_EQ(cfg.fragment_len, 12000u);
  EXPECT_EQ(cfg.conv1_out_len(), 1493u);
  EXPECT_EQ(cfg.conv2_out_len(), 366u);
  const BarkNet net = init_barknet(cfg);
  EXPECT_EQ(net.head.in_features(), 32u);
  EXPECT_EQ(net.head.out_features(), 5u);
  EXPECT_EQ(net.conv1.weights.shape(), (std::vector<std::size_t>{16, 1, 64}));
  EXPECT_EQ(net.conv2.weights.shape(), (std::vector<std::size_t>{32, 16, 32}));
}

TEST(BarkNetConfigTest, TooShortFragmentIsBadConfig) {
  BarkNetConfig cfg;
  cfg.fragment_len = 10;
  try {
    init_barknet(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadConfig);
  }
  cfg.fragment_len = 64 + 8 * 30;  // conv1 fits, conv2 does not
  EXPECT_THROW(init_barknet(cfg), Error);
}

TEST(InitTest, DeterministicForSeed) {
  const BarkNet a = init_barknet(micro_config(3));
  const BarkNet b = init_barknet(micro_config(3));
  const BarkNet c = init_barknet(micro_config(4));
  EXPECT_EQ(save_checkpoint(a), save_checkpoint(b));
  EXPECT_NE(a.conv1.weights, c.conv1.weights);
  for (double v : a.conv1.bias.values()) EXPECT_EQ(v, 0.0);
  for (double v : a.bn1.gamma.values()) EXPECT_EQ(v, 1.0);
}

TEST(ForwardTest, RowsSumToOne) {
  SeededRng rng(1);
  BarkNet net = init_barknet(micro_config(1));
  const Tensor x = random_tensor({6, 1, 64}, rng);
  for (Mode mode : {Mode::kTrain, Mode::kInfer}) {
    const Tensor p = forward(net, x, mode);
    ASSERT_EQ(p.shape(), (std::vector<std::size_t>{6, 5}));
    for (std::size_t b = 0; b < 6; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < 5; ++j) s += p.at(b, j);
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(ForwardTest, InferIsPure) {
  SeededRng rng(2);
  BarkNet net = init_barknet(micro_config(2));
  const Tensor x = random_tensor({1, 1, 64}, rng);
  const Tensor a = forward(net, x, Mode::kInfer);
  const Tensor b = forward(net, x, Mode::kInfer);
  EXPECT_EQ(a, b);
  EXPECT_EQ(infer(net, x), a);
}

TEST(ForwardTest, ZeroSignalIsFinite) {
  const BarkNet net = init_barknet(BarkNetConfig{});
  const Tensor p = infer(net, Tensor({1, 1, 12000}));
  EXPECT_TRUE(p.all_finite());
}

TEST(ForwardTest, WrongLengthIsShapeMismatch) {
  BarkNet net = init_barknet(micro_config(0));
  try {
    forward(net, Tensor({1, 1, 65}), Mode::kInfer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(MakeInputBatchTest, PeakNormalises) {
  const std::vector<double> a = {0.1, -0.2}, b = {0.0, 0.0};
  const std::vector<const std::vector<double>*> ptrs = {&a, &b};
  const Tensor t = make_input_batch(ptrs);
  EXPECT_EQ(t.shape(), (std::vector<std::size_t>{2, 1, 2}));
  EXPECT_DOUBLE_EQ(t[0], 0.5);
  EXPECT_DOUBLE_EQ(t[1], -1.0);
  EXPECT_EQ(t[2], 0.0);
}

TEST(PredictTest, Argmax) {
  const double probs[] = {0.1, 0.2, 0.4, 0.2, 0.1};
  EXPECT_EQ(argmax_class(probs), EmotionClass::kFearAndPain);
  const double tie[] = {0.3, 0.1, 0.0, 0.3, 0.3};
  EXPECT_EQ(argmax_class(tie), EmotionClass::kAggressive);
  const double tie_late[] = {0.1, 0.1, 0.2, 0.3, 0.3};
  EXPECT_EQ(argmax_class(tie_late), EmotionClass::kHappy);
}

TEST(PredictTest, ConfidencesPassThrough) {
  SeededRng rng(3);
  const BarkNet net = init_barknet(micro_config(3));
  Fragment f{std::vector<double>(64)};
  for (double& v : f.samples) v = rng.uniform(-0.5, 0.5);
  const Prediction p = predict(net, f);
  const std::vector<const std::vector<double>*> one = {&f.samples};
  const Tensor probs = infer(net, make_input_batch(one));
  for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(p.confidences[j], probs[j]);
  EXPECT_EQ(p.label, argmax_class(p.confidences));
  EXPECT_THROW(predict(net, Fragment{std::vector<double>(63)}), Error);
}

BarkNet trained_looking_net() {
  // Perturb every serialised value so the round trip is not trivially zeros.
  SeededRng rng(4);
  BarkNet net = init_barknet(micro_config(4));
  for (Tensor* t : net.parameters()) {
    for (double& v : t->values()) v += rng.uniform(-0.1, 0.1);
  }
  Tensor x = random_tensor({4, 1, 64}, rng);
  forward(net, x, Mode::kTrain);  // moves running statistics
  return net;
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  SeededRng rng(5);
  const BarkNet net = trained_looking_net();
  const auto bytes = save_checkpoint(net);
  const BarkNet back = load_checkpoint(bytes);
  EXPECT_EQ(save_checkpoint(back), bytes);
  EXPECT_EQ(back.bn2.running_var, net.bn2.running_var);
  const Tensor x = random_tensor({3, 1, 64}, rng);
  EXPECT_EQ(infer(back, x), infer(net, x));
}

TEST(CheckpointTest, HeaderLayout) {
  const auto bytes = save_checkpoint(init_barknet(micro_config(0x0000000100000002ULL)));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 5), "BARK1");
  EXPECT_EQ(bytes[5], 1);  // version, little-endian
  EXPECT_EQ(bytes[6] | bytes[7] | bytes[8], 0);
  EXPECT_EQ(bytes[9], 64);  // fragment_len
  EXPECT_EQ(bytes[9 + 4 * 7], 5);   // outputs
  EXPECT_EQ(bytes[9 + 4 * 8], 2);   // seed low word
  EXPECT_EQ(bytes[9 + 4 * 9], 1);   // seed high word
  // conv1: 2x1x8 + 2; bn1: 4x2; conv2: 3x2x4 + 3; bn2: 4x3; dense: 5x3 + 5.
  const std::size_t values = 18 + 8 + 27 + 12 + 20;
  EXPECT_EQ(bytes.size(), 49 + 8 * values);
}

ErrorCode load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    load_checkpoint(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kEmpty;
}

TEST(CheckpointTest, BadMagic) {
  auto bytes = save_checkpoint(trained_looking_net());
  bytes[0] = 'X';
  EXPECT_EQ(load_error(bytes), ErrorCode::kBadMagic);
}

TEST(CheckpointTest, VersionMismatch) {
  auto bytes = save_checkpoint(trained_looking_net());
  bytes[5] = 2;
  EXPECT_EQ(load_error(bytes), ErrorCode::kVersionMismatch);
}

TEST(CheckpointTest, EveryTruncationIsRejected) {
  const auto bytes = save_checkpoint(trained_looking_net());
  for (std::size_t n = 5; n < bytes.size(); ++n) {
    const std::vector<std::uint8_t> prefix(bytes.begin(), bytes.begin() + n);
    ASSERT_EQ(load_error(prefix), ErrorCode::kTruncated) << "prefix " << n;
  }
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_EQ(load_error(longer), ErrorCode::kBadConfig);
}

TEST(BarkNetGradientTest, MatchesFiniteDifferencesOnMicroConfig) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    for (const auto& check : testing::full_net_grad_check(seed)) {
      const auto& r = check.result;
      if (check.name == "conv1.b" || check.name == "conv2.b") {
        // Batchnorm cancels any per-channel shift, so these are exactly zero
        // and both estimates are round-off.
        EXPECT_LE(std::abs(r.worst_analytic), 1e-12) << check.name;
        EXPECT_LE(std::abs(r.worst_numeric), 1e-9) << check.name;
        continue;
      }
      EXPECT_LE(r.max_relative_error, 1e-6)
          << "seed " << seed << " " << check.name << " index " << r.worst_index << " analytic "
          << r.worst_analytic << " numeric " << r.worst_numeric;
    }
  }
}

}  // namespace
}  // namespace bark
