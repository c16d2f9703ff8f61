#include "bark/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bark/error.hpp"

namespace bark {

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < classes_; ++t) s += at(t, pred);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < classes_; ++c) s += at(c, c);
  return s;
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::size_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows.size()) {
      throw Error(ErrorCode::kShapeMismatch, "confusion matrix must be square");
    }
    for (std::size_t p = 0; p < rows.size(); ++p) cm.at(t, p) = rows[t][p];
  }
  return cm;
}

ConfusionMatrix confusion(std::span<const int> truths, std::span<const int> preds,
                          std::size_t classes) {
  if (truths.size() != preds.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(truths.size()) + " truths vs " +
                                                std::to_string(preds.size()) + " predictions");
  }
  if (truths.empty()) throw Error(ErrorCode::kEmpty, "no items to tabulate");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i];
    const int p = preds[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes ||
        static_cast<std::size_t>(p) >= classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "item " + std::to_string(i));
    }
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

ConfusionMatrix confusion(std::span<const EmotionClass> truths,
                          std::span<const EmotionClass> preds) {
  std::vector<int> t(truths.size());
  std::vector<int> p(preds.size());
  std::transform(truths.begin(), truths.end(), t.begin(), ordinal);
  std::transform(preds.begin(), preds.end(), p.begin(), ordinal);
  return confusion(t, p, kNumClasses);
}

ClassificationReport build_report(const ConfusionMatrix& cm, std::vector<std::string> names) {
  const std::size_t n = cm.classes();
  const std::size_t total = cm.total();
  if (n == 0 || total == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  if (names.empty()) {
    for (std::size_t c = 0; c < n; ++c) {
      names.push_back(n == kNumClasses ? std::string(class_name(static_cast<EmotionClass>(c)))
                                       : std::to_string(c));
    }
  }
  if (names.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "class name count differs from matrix size");
  }

  ClassificationReport r;
  r.total_support = total;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (std::size_t c = 0; c < n; ++c) {
    ClassMetrics m;
    m.name = names[c];
    m.support = cm.row_sum(c);
    const double tp = static_cast<double>(cm.at(c, c));
    const std::size_t predicted = cm.col_sum(c);
    if (predicted > 0) {
      m.precision = tp / static_cast<double>(predicted);
    } else {
      m.degenerate = true;
    }
    if (m.support > 0) {
      m.recall = tp / static_cast<double>(m.support);
    } else {
      m.degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.degenerate = true;
    }
    r.classes.push_back(std::move(m));
  }

  for (const auto& m : r.classes) {
    r.macro_avg.precision += m.precision;
    r.macro_avg.recall += m.recall;
    r.macro_avg.f1 += m.f1;
    const double w = static_cast<double>(m.support);
    r.weighted_avg.precision += w * m.precision;
    r.weighted_avg.f1 += w * m.f1;
  }
  const double dn = static_cast<double>(n);
  const double dt = static_cast<double>(total);
  r.macro_avg = {r.macro_avg.precision / dn, r.macro_avg.recall / dn, r.macro_avg.f1 / dn};
  // support_c * recall_c is tp_c, so the weighted recall is trace / total.
  // Summing the rounded products would drift from accuracy in the last bit.
  r.weighted_avg = {r.weighted_avg.precision / dt, r.accuracy, r.weighted_avg.f1 / dt};
  return r;
}

std::string format_metric(double value) {
  const double rounded = std::round(value * 100.0) / 100.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", rounded == 0.0 ? 0.0 : rounded);
  return buf;
}

namespace {

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

constexpr std::size_t kColumn = 9;

}  // namespace

std::string render_report(const ClassificationReport& report) {
  std::size_t width = std::string("weighted avg").size();
  for (const auto& m : report.classes) width = std::max(width, m.name.size());

  std::string out = pad_left("", width) + " ";
  for (const char* h : {"precision", "recall", "f1-score", "support"}) {
    out += " " + pad_left(h, kColumn);
  }
  out += "\n\n";

  for (const auto& m : report.classes) {
    out += pad_left(m.name, width) + " ";
    out += " " + pad_left(format_metric(m.precision), kColumn);
    out += " " + pad_left(format_metric(m.recall), kColumn);
    out += " " + pad_left(format_metric(m.f1), kColumn);
    out += " " + pad_left(std::to_string(m.support), kColumn) + "\n";
  }
  out += "\n";

  const std::string total = std::to_string(report.total_support);
  out += pad_left("accuracy", width) + " ";
  out += " " + pad_left("", kColumn) + " " + pad_left("", kColumn);
  out += " " + pad_left(format_metric(report.accuracy), kColumn);
  out += " " + pad_left(total, kColumn) + "\n";

  const auto avg_row = [&](const char* label, const AverageMetrics& a) {
    return pad_left(label, width) + " " + " " + pad_left(format_metric(a.precision), kColumn) +
           " " + pad_left(format_metric(a.recall), kColumn) + " " +
           pad_left(format_metric(a.f1), kColumn) + " " + pad_left(total, kColumn) + "\n";
  };
  out += avg_row("macro avg", report.macro_avg);
  out += avg_row("weighted avg", report.weighted_avg);

  std::string degenerate;
  for (const auto& m : report.classes) {
    if (m.degenerate) degenerate += (degenerate.empty() ? "" : ", ") + m.name;
  }
  if (!degenerate.empty()) {
    out += "\ndegenerate classes (0/0 reported as 0.00): " + degenerate + "\n";
  }
  return out;
}

}  // namespace bark
