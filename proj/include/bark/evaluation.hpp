#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bark/data_pipeline.hpp"

namespace bark {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kNumClasses)
      : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const noexcept { return classes_; }
  std::size_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * classes_ + pred]; }
  std::size_t at(std::size_t truth, std::size_t pred) const {
    return counts_[truth * classes_ + pred];
  }
  std::size_t row_sum(std::size_t truth) const;
  std::size_t col_sum(std::size_t pred) const;
  std::size_t total() const;
  std::size_t trace() const;

  // Row-major counts.
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::size_t>>& rows);

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

// Throws Error{kLengthMismatch, kEmpty}.
ConfusionMatrix confusion(std::span<const EmotionClass> truths,
                          std::span<const EmotionClass> preds);
ConfusionMatrix confusion(std::span<const int> truths, std::span<const int> preds,
                          std::size_t classes);

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool degenerate = false;  // some ratio was 0/0 and was reported as 0
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  AverageMetrics macro_avg;
  AverageMetrics weighted_avg;
  std::size_t total_support = 0;
};

// Class names default to the emotion names for a 5x5 matrix and to ordinals
// otherwise. Throws Error{kEmptyMatrix}.
ClassificationReport build_report(const ConfusionMatrix& cm,
                                  std::vector<std::string> names = {});

// Round half away from zero to two decimals, printed with two decimals.
std::string format_metric(double value);

// Fixed-width table: header "precision recall f1-score support", one row per
// class, then accuracy, macro avg and weighted avg rows.
std::string render_report(const ClassificationReport& report);

}  // namespace bark
