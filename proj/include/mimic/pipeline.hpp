#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mimic/classifiers.hpp"
#include "mimic/data.hpp"
#include "mimic/metrics.hpp"

namespace mimic {

enum class SelectionMetric { accuracy, macro_f1 };

std::string_view to_string(SelectionMetric metric);
SelectionMetric parse_selection_metric(std::string_view name);

/// The four families with their default hyperparameters, in registration
/// order svm, knn, rf, nb.
std::vector<ClassifierSpec> default_classifiers();

struct PipelineConfig {
  std::vector<ClassifierSpec> classifiers = default_classifiers();
  std::size_t cv_k = kDefaultFolds;
  SelectionMetric selection_metric = SelectionMetric::accuracy;
  std::uint64_t seed = 0;
  SplitSpec split{};

  void validate() const;
};

/// Cross-validation outcome for one raced classifier spec.
struct CvReport {
  ClassifierSpec spec;  // seed as actually used
  std::vector<MetricsReport> folds;
  double mean_accuracy = 0.0;
  double mean_precision = 0.0;  // macro
  double mean_recall = 0.0;     // macro
  double mean_f1 = 0.0;         // macro

  double selection_value(SelectionMetric metric) const {
    return metric == SelectionMetric::accuracy ? mean_accuracy : mean_f1;
  }
};

/// Winner of a race plus the evidence used to pick it.
struct RaceResult {
  std::vector<CvReport> reports;
  std::size_t winner = 0;
  TrainedModel model;
};

/// Index of the best report: highest selection metric, then highest macro
/// F1, then lowest registration index. Entries with allowed[i] == false are
/// skipped; returns nullopt when none remain.
std::optional<std::size_t> select_best(const std::vector<CvReport>& reports, SelectionMetric metric,
                                       const std::vector<bool>& allowed = {});

/// Runs stratified k-fold cross-validation for every spec (seeds as given).
std::vector<CvReport> cross_validate(const std::vector<ClassifierSpec>& specs, const Dataset& d,
                                     std::size_t k, std::uint64_t fold_seed);

/// Races every configured spec on the private data and refits the winner on
/// all of it as a teacher-private model.
RaceResult train_teacher(const Dataset& private_set, const PipelineConfig& cfg);

enum class Provenance { teacher_annotated };

struct AnnotatedDataset {
  Dataset data;  // public features with teacher labels
  Provenance provenance = Provenance::teacher_annotated;
  std::string teacher_id;
};

/// Short identifier for a model: family, seed and a hash of its parameters.
std::string model_id(const TrainedModel& m);

/// Labels the unlabeled public pool with the teacher's hard predictions.
/// Refuses labeled pools so true labels cannot leak to the student.
AnnotatedDataset annotate(const TrainedModel& teacher, const Dataset& public_pool);

/// Same race as train_teacher, on teacher labels only; the winner is
/// student-shareable. CV scores are measured against teacher labels.
RaceResult train_student(const AnnotatedDataset& annotated, const PipelineConfig& cfg);

struct MetricDeltas {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
  double auc = 0.0;
};

struct FidelityReport {
  MetricsReport teacher_metrics;
  MetricsReport student_metrics;
  double agreement = 0.0;
  MetricDeltas deltas;  // teacher minus student
  RocCurve teacher_roc;
  RocCurve student_roc;
};

/// Compares teacher and student on labeled held-out data.
FidelityReport evaluate_fidelity(const TrainedModel& teacher, const TrainedModel& student,
                                 const Dataset& test);

struct AnnotationSummary {
  std::size_t pool_size = 0;
  std::vector<std::size_t> label_counts;
  std::string teacher_id;
  /// Agreement of teacher labels with the hidden public labels. Computed
  /// after the student is trained, for reporting only.
  double hidden_label_agreement = 0.0;
};

struct Timings {
  double split_seconds = 0.0;
  double teacher_seconds = 0.0;
  double annotate_seconds = 0.0;
  double student_seconds = 0.0;
  double evaluate_seconds = 0.0;
};

struct PipelineRun {
  PipelineConfig config;
  std::string source_id;
  std::vector<std::size_t> private_rows;
  std::vector<std::size_t> public_rows;
  std::vector<std::size_t> test_rows;
  RaceResult teacher;
  AnnotationSummary annotation;
  RaceResult student;
  /// Student that may be exported. Differs from the race winner only when
  /// KNN wins (a KNN model is its training data); empty when no raced
  /// family is exportable.
  std::optional<TrainedModel> shared_student;
  std::optional<std::size_t> shared_student_index;
  std::vector<std::string> warnings;
  /// Fidelity of the shared student (race winner when nothing is shared).
  FidelityReport fidelity;
  Timings timings;
};

/// split -> train_teacher -> annotate -> train_student -> evaluate_fidelity.
PipelineRun run_pipeline(const Dataset& d, const PipelineConfig& cfg);

/// Same as run_pipeline on an existing split.
PipelineRun run_pipeline(const SplitResult& split, const PipelineConfig& cfg);

}  // namespace mimic
