#include "bark/training.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bark/error.hpp"
#include "bark/evaluation.hpp"
#include "test_util.hpp"

namespace bark {
namespace {

BarkNetConfig small_net(std::uint64_t seed) {
  BarkNetConfig cfg;
  cfg.fragment_len = 400;
  cfg.conv1_channels = 8;
  cfg.conv1_kernel = 16;
  cfg.conv1_stride = 4;
  cfg.conv2_channels = 8;
  cfg.conv2_kernel = 8;
  cfg.conv2_stride = 2;
  cfg.seed = seed;
  return cfg;
}

std::vector<LabeledFragment> tones(std::size_t per_class, std::uint64_t seed) {
  return synth_dataset(per_class, 400, 16000, 10.0, seed);
}

TrainConfig quick_train(std::size_t epochs) {
  TrainConfig cfg;
  cfg.epochs_max = epochs;
  cfg.batch_size = 16;
  cfg.seed = 11;
  return cfg;
}

TEST(TrainConfigTest, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  for (auto mutate : {+[](TrainConfig& c) { c.epochs_max = 0; },
                      +[](TrainConfig& c) { c.batch_size = 0; },
                      +[](TrainConfig& c) { c.early_stop_patience = 0; }}) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), Error);
  }
}

TEST(FitTest, FirstBatchLossIsTheUntrainedLoss) {
  const auto data = tones(40, 1);
  const TrainConfig cfg = quick_train(1);
  BarkNet net = init_barknet(small_net(0));
  const auto first = batch_iterator(data, cfg.batch_size, derive_seed(cfg.seed, 1)).front();
  std::vector<int> labels;
  for (const auto* item : first) labels.push_back(ordinal(item->label));
  BarkNet copy = net;
  const double expected = cross_entropy(forward(copy, make_input_batch(first), Mode::kTrain), labels);
  const FitResult r = fit(net, data, data, cfg);
  EXPECT_EQ(r.log.first_batch_loss, expected);
}

TEST(FitTest, UniformHeadGivesLnFive) {
  // With the head weights zeroed every row of the softmax is uniform.
  const auto data = tones(40, 1);
  BarkNet net = init_barknet(small_net(0));
  net.head.weights.fill(0.0);
  const FitResult r = fit(net, data, data, quick_train(1));
  EXPECT_NEAR(r.log.first_batch_loss, std::log(5.0), 1e-12);
}

TEST(FitTest, LearnsSeparableTones) {
  const auto train = tones(60, 2);
  const auto val = tones(20, 3);
  const FitResult r = fit(init_barknet(small_net(1)), train, val, quick_train(15));
  EXPECT_GE(r.log.best_val_accuracy, 0.9);
  EXPECT_GE(evaluate_split(r.net, val).accuracy, 0.9);
}

TEST(FitTest, DeterministicLogAndParameters) {
  const auto train = tones(20, 4);
  const auto val = tones(6, 5);
  const FitResult a = fit(init_barknet(small_net(2)), train, val, quick_train(3));
  const FitResult b = fit(init_barknet(small_net(2)), train, val, quick_train(3));
  ASSERT_EQ(a.log.epochs.size(), b.log.epochs.size());
  for (std::size_t i = 0; i < a.log.epochs.size(); ++i) {
    EXPECT_EQ(format_epoch_line(a.log.epochs[i]), format_epoch_line(b.log.epochs[i]));
    EXPECT_EQ(a.log.epochs[i].train_loss, b.log.epochs[i].train_loss);
  }
  EXPECT_EQ(save_checkpoint(a.net), save_checkpoint(b.net));
}

TEST(FitTest, ReturnsBestEpoch) {
  const auto train = tones(20, 6);
  const auto val = tones(6, 7);
  TrainConfig cfg = quick_train(8);
  cfg.early_stop_patience = 2;
  const FitResult r = fit(init_barknet(small_net(3)), train, val, cfg);
  const auto& epochs = r.log.epochs;
  ASSERT_FALSE(epochs.empty());
  double best = 0.0;
  for (const auto& e : epochs) best = std::max(best, e.val_accuracy);
  EXPECT_EQ(r.log.best_val_accuracy, best);
  EXPECT_EQ(epochs[r.log.best_epoch - 1].val_accuracy, best);
  // earliest epoch reaching the max
  for (std::size_t i = 0; i + 1 < r.log.best_epoch; ++i) EXPECT_LT(epochs[i].val_accuracy, best);
  EXPECT_EQ(evaluate_split(r.net, val).accuracy, best);
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    EXPECT_EQ(epochs[i].epoch, i + 1);
    EXPECT_TRUE(std::isfinite(epochs[i].train_loss));
  }
  // stopped either at the cap or after `patience` epochs without improvement
  EXPECT_TRUE(epochs.size() == cfg.epochs_max ||
              epochs.size() - r.log.best_epoch == cfg.early_stop_patience);
}

TEST(FitTest, SgdAlsoRuns) {
  const auto data = tones(10, 8);
  TrainConfig cfg = quick_train(2);
  cfg.optimizer = OptimizerKind::kSgd;
  const FitResult r = fit(init_barknet(small_net(4)), data, data, cfg);
  EXPECT_EQ(r.log.epochs.size(), 2u);
}

TEST(FitTest, Errors) {
  const auto data = tones(4, 9);
  const BarkNet net = init_barknet(small_net(5));
  try {
    fit(net, {}, data, quick_train(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySplit);
  }
  EXPECT_THROW(fit(net, data, {}, quick_train(1)), Error);
  const auto wrong = synth_dataset(2, 300, 16000, 10.0, 1);
  try {
    fit(net, wrong, data, quick_train(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(FormatEpochLineTest, Layout) {
  EXPECT_EQ(format_epoch_line({3, 0.5, 0.875, 1.0}), "epoch=3 loss=0.500000 val_acc=0.8750");
}

TEST(EvaluateSplitTest, AccuracyMatchesConfusionTrace) {
  const auto items = tones(30, 10);
  const BarkNet net = init_barknet(small_net(6));
  const SplitEvaluation ev = evaluate_split(net, items);
  ASSERT_EQ(ev.predictions.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(ev.truths[i], items[i].label);
  const ConfusionMatrix cm = confusion(ev.truths, ev.predictions);
  EXPECT_EQ(ev.accuracy, static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
  EXPECT_EQ(build_report(cm).accuracy, ev.accuracy);
  // predictions agree with single-fragment predict
  for (std::size_t i = 0; i < items.size(); i += 17) {
    EXPECT_EQ(predict(net, items[i].fragment).label, ev.predictions[i]);
  }
  EXPECT_THROW(evaluate_split(net, {}), Error);
}

}  // namespace
}  // namespace bark
