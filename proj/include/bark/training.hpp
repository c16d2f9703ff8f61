#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bark/data_pipeline.hpp"
#include "bark/model.hpp"
#include "bark/optim.hpp"

namespace bark {

enum class OptimizerKind { kAdam, kSgd };

struct TrainConfig {
  std::size_t epochs_max = 50;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamConfig adam;
  double sgd_lr = 0.01;
  std::size_t early_stop_patience = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  double first_batch_loss = 0.0;
};

// "epoch=<n> loss=<x> val_acc=<y>"
std::string format_epoch_line(const EpochRecord& record);

struct FitResult {
  BarkNet net;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training with early stopping on validation accuracy. Returns the
// parameters of the best validation epoch (earliest on ties).
// Throws Error{kEmptySplit, kShapeMismatch}.
FitResult fit(BarkNet net, const std::vector<LabeledFragment>& train,
              const std::vector<LabeledFragment>& val, const TrainConfig& cfg,
              const EpochCallback& on_epoch = {});

struct SplitEvaluation {
  double accuracy = 0.0;
  std::vector<EmotionClass> predictions;
  std::vector<EmotionClass> truths;
};

// Infer-mode predictions over `items`. Throws Error{kEmptySplit}.
SplitEvaluation evaluate_split(const BarkNet& net, const std::vector<LabeledFragment>& items);

}  // namespace bark
