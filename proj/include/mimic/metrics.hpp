#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mimic/data.hpp"

namespace mimic {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// One-vs-rest counts for the given positive class.
ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                          Label positive);

// Undefined ratios (zero denominator) evaluate to 0.
double accuracy(const ConfusionMatrix& c);
double precision(const ConfusionMatrix& c);
double recall(const ConfusionMatrix& c);
double f1(const ConfusionMatrix& c);

/// Precision, recall and F1 of one class, or their macro average.
struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when the corresponding denominator was zero (value reported as 0).
  bool precision_undefined = false;
  bool recall_undefined = false;

  bool operator==(const ClassScores&) const = default;
};

ClassScores class_scores(const ConfusionMatrix& c);

enum class Averaging { positive_class, macro };

struct MetricsReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  Label positive = 1;
  ConfusionMatrix confusion;  // for the positive class
  ClassScores positive_class;
  ClassScores macro;
  std::vector<ClassScores> per_class;

  const ClassScores& scores(Averaging averaging) const {
    return averaging == Averaging::macro ? macro : positive_class;
  }
  bool operator==(const MetricsReport&) const = default;
};

/// Accuracy plus positive-class and macro (equal class weight) scores.
MetricsReport macro_metrics(std::span<const Label> y_true, std::span<const Label> y_pred,
                            std::size_t class_count, Label positive = 1);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  /// Samples with score >= threshold are predicted positive. The first point
  /// uses +infinity.
  double threshold = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  bool operator==(const RocCurve&) const = default;
};

/// Sweeps thresholds over the distinct scores in descending order. Tied
/// scores move together, giving diagonal segments, so the AUC equals the
/// Mann-Whitney statistic with half credit for ties.
RocCurve roc(std::span<const double> scores, std::span<const Label> y_true, Label positive = 1);

/// Trapezoidal area under a sequence of (fpr, tpr) points.
double trapezoid_auc(std::span<const RocPoint> points);

/// threshold,fpr,tpr rows with a header.
std::string roc_to_csv(const RocCurve& curve);

}  // namespace mimic
