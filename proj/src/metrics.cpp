#include "mimic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mimic/error.hpp"

namespace mimic {

namespace {

void check_lengths(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) {
    throw DataError("label vectors differ in length (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  if (a.empty()) {
    throw DataError("cannot score an empty prediction set");
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * (p * r) / (p + r); }

}  // namespace

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                          Label positive) {
  check_lengths(y_true, y_pred);
  ConfusionMatrix c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] == positive;
    const bool predicted = y_pred[i] == positive;
    if (actual && predicted) {
      ++c.tp;
    } else if (!actual && predicted) {
      ++c.fp;
    } else if (!actual) {
      ++c.tn;
    } else {
      ++c.fn;
    }
  }
  return c;
}

double accuracy(const ConfusionMatrix& c) {
  if (c.total() == 0) {
    throw DataError("accuracy of an empty confusion matrix");
  }
  return ratio(c.tp + c.tn, c.total());
}

double precision(const ConfusionMatrix& c) { return ratio(c.tp, c.tp + c.fp); }
double recall(const ConfusionMatrix& c) { return ratio(c.tp, c.tp + c.fn); }
double f1(const ConfusionMatrix& c) { return harmonic(precision(c), recall(c)); }

ClassScores class_scores(const ConfusionMatrix& c) {
  ClassScores s;
  s.precision = precision(c);
  s.recall = recall(c);
  s.f1 = harmonic(s.precision, s.recall);
  s.precision_undefined = c.tp + c.fp == 0;
  s.recall_undefined = c.tp + c.fn == 0;
  return s;
}

MetricsReport macro_metrics(std::span<const Label> y_true, std::span<const Label> y_pred,
                            std::size_t class_count, Label positive) {
  check_lengths(y_true, y_pred);
  MetricsReport r;
  r.n = y_true.size();
  r.positive = positive;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    correct += y_true[i] == y_pred[i] ? 1 : 0;
  }
  r.accuracy = ratio(correct, r.n);
  r.confusion = confusion(y_true, y_pred, positive);
  r.positive_class = class_scores(r.confusion);
  for (std::size_t c = 0; c < class_count; ++c) {
    r.per_class.push_back(class_scores(confusion(y_true, y_pred, static_cast<Label>(c))));
  }
  for (const auto& s : r.per_class) {
    r.macro.precision += s.precision;
    r.macro.recall += s.recall;
    r.macro.f1 += s.f1;
    r.macro.precision_undefined = r.macro.precision_undefined || s.precision_undefined;
    r.macro.recall_undefined = r.macro.recall_undefined || s.recall_undefined;
  }
  const auto k = static_cast<double>(class_count);
  r.macro.precision /= k;
  r.macro.recall /= k;
  r.macro.f1 /= k;
  return r;
}

RocCurve roc(std::span<const double> scores, std::span<const Label> y_true, Label positive) {
  if (scores.size() != y_true.size()) {
    throw DataError("scores and labels differ in length");
  }
  std::size_t n_pos = 0;
  for (const Label y : y_true) {
    n_pos += y == positive ? 1 : 0;
  }
  const std::size_t n_neg = y_true.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("ROC needs both positive and negative samples");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (y_true[order[i]] == positive ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({ratio(fp, n_neg), ratio(tp, n_pos), threshold});
  }
  curve.auc = trapezoid_auc(curve.points);
  return curve;
}

double trapezoid_auc(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  }
  return area;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) {
    out += std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold);
    out += ',';
    out += format_double(p.fpr);
    out += ',';
    out += format_double(p.tpr);
    out += '\n';
  }
  return out;
}

}  // namespace mimic
