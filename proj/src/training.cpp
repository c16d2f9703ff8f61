#include "bark/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "bark/error.hpp"
#include "bark/rng.hpp"

namespace bark {
namespace {

constexpr std::size_t kEvalChunk = 64;

void check_lengths(const BarkNet& net, const std::vector<LabeledFragment>& items,
                   const char* split) {
  for (const auto& item : items) {
    if (item.fragment.samples.size() != net.config.fragment_len) {
      throw Error(ErrorCode::kShapeMismatch,
                  std::string(split) + " fragment has " +
                      std::to_string(item.fragment.samples.size()) +
                      " samples, model expects " + std::to_string(net.config.fragment_len));
    }
  }
}

std::vector<int> labels_of(std::span<const LabeledFragment* const> batch) {
  std::vector<int> labels;
  labels.reserve(batch.size());
  for (const auto* item : batch) labels.push_back(ordinal(item->label));
  return labels;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs_max < 1 || batch_size < 1 || early_stop_patience < 1) {
    throw Error(ErrorCode::kBadConfig,
                "epochs_max, batch_size and early_stop_patience must be >= 1");
  }
}

std::string format_epoch_line(const EpochRecord& record) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "epoch=%zu loss=%.6f val_acc=%.4f", record.epoch,
                record.train_loss, record.val_accuracy);
  return buf;
}

FitResult fit(BarkNet net, const std::vector<LabeledFragment>& train,
              const std::vector<LabeledFragment>& val, const TrainConfig& cfg,
              const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::kEmptySplit, "training split is empty");
  if (val.empty()) throw Error(ErrorCode::kEmptySplit, "validation split is empty");
  check_lengths(net, train, "train");
  check_lengths(net, val, "validation");

  AdamState adam(cfg.adam);
  FitResult result{net, {}};
  std::size_t since_best = 0;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= cfg.epochs_max; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    std::size_t seen = 0;

    for (const auto& batch : batch_iterator(train, cfg.batch_size, derive_seed(cfg.seed, epoch))) {
      const Tensor input = make_input_batch(batch);
      const std::vector<int> labels = labels_of(batch);
      LossAndGrads step = loss_and_gradients(net, input, labels);
      if (!std::isfinite(step.loss)) {
        throw Error(ErrorCode::kBadConfig, "training loss diverged at epoch " + std::to_string(epoch));
      }
      if (epoch == 1 && seen == 0) result.log.first_batch_loss = step.loss;
      loss_sum += step.loss * static_cast<double>(batch.size());
      seen += batch.size();

      const auto params = net.parameters();
      const auto grads = step.grads.list();
      if (cfg.optimizer == OptimizerKind::kAdam) {
        adam_step(adam, params, grads);
      } else {
        sgd_step(params, grads, cfg.sgd_lr);
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(seen);
    record.val_accuracy = evaluate_split(net, val).accuracy;
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (!have_best || record.val_accuracy > result.log.best_val_accuracy) {
      have_best = true;
      result.log.best_epoch = epoch;
      result.log.best_val_accuracy = record.val_accuracy;
      result.net = net;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

SplitEvaluation evaluate_split(const BarkNet& net, const std::vector<LabeledFragment>& items) {
  if (items.empty()) throw Error(ErrorCode::kEmptySplit, "cannot evaluate an empty split");
  check_lengths(net, items, "evaluation");

  SplitEvaluation out;
  out.predictions.reserve(items.size());
  out.truths.reserve(items.size());
  std::size_t correct = 0;
  for (std::size_t start = 0; start < items.size(); start += kEvalChunk) {
    const std::size_t end = std::min(items.size(), start + kEvalChunk);
    std::vector<const LabeledFragment*> chunk;
    for (std::size_t i = start; i < end; ++i) chunk.push_back(&items[i]);
    const Tensor probs = infer(net, make_input_batch(chunk));
    for (std::size_t r = 0; r < chunk.size(); ++r) {
      const EmotionClass pred = argmax_class(
          std::span<const double>(probs.data() + r * kNumClasses, kNumClasses));
      out.predictions.push_back(pred);
      out.truths.push_back(chunk[r]->label);
      if (pred == chunk[r]->label) ++correct;
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(items.size());
  return out;
}

}  // namespace bark
