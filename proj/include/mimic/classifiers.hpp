#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mimic/data.hpp"

namespace mimic {

enum class ClassifierKind { svm, knn, rf, nb };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view name);

/// Linear SVM trained by Pegasos-style stochastic subgradient descent.
struct SvmParams {
  double lambda = 1e-4;
  std::size_t epochs = 50;
  bool operator==(const SvmParams&) const = default;
};

struct KnnParams {
  std::size_t k = 8;
  bool operator==(const KnnParams&) const = default;
};

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 16;
  std::size_t min_samples_split = 2;
  bool operator==(const ForestParams&) const = default;
};

struct NaiveBayesParams {
  /// Fraction of the largest feature variance added to every variance.
  double var_smoothing = 1e-9;
  bool operator==(const NaiveBayesParams&) const = default;
};

using Hyperparameters = std::variant<SvmParams, KnnParams, ForestParams, NaiveBayesParams>;

struct ClassifierSpec {
  Hyperparameters params;
  std::uint64_t seed = 0;

  ClassifierKind kind() const { return static_cast<ClassifierKind>(params.index()); }
  void validate() const;

  static ClassifierSpec defaults(ClassifierKind kind, std::uint64_t seed = 0);

  bool operator==(const ClassifierSpec&) const = default;
};

/// Who may see a model. Teachers never leave the data owner.
enum class Origin { teacher_private, student_shareable };

std::string_view to_string(Origin origin);

// ---------------------------------------------------------------------------
// Fitted parameters per family
// ---------------------------------------------------------------------------

struct LinearUnit {
  std::vector<double> weights;
  double bias = 0.0;

  double margin(std::span<const double> x) const;
  bool operator==(const LinearUnit&) const = default;
};

/// Binary problems carry one unit (positive class = 1). Problems with more
/// classes carry one one-vs-rest unit per class.
struct LinearSvmModel {
  std::vector<LinearUnit> units;
  bool operator==(const LinearSvmModel&) const = default;
};

struct KnnModel {
  Matrix points;  // standardized training rows
  std::vector<Label> labels;
  std::size_t k = 0;

  /// Indices of the k nearest stored points, nearest first. Distance ties go
  /// to the lower stored index.
  std::vector<std::size_t> neighbors(std::span<const double> x) const;
  bool operator==(const KnnModel&) const = default;
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // go left when x[feature] <= threshold
  std::int32_t left = kLeaf;
  std::int32_t right = kLeaf;
  std::vector<std::uint32_t> class_counts;

  bool is_leaf() const { return feature == kLeaf; }
  /// Majority class of the counts; ties go to the lower index.
  Label majority() const;
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
  Label predict(std::span<const double> x) const { return leaf_for(x).majority(); }
  bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;

  /// Per-class tree vote counts.
  std::vector<std::size_t> votes(std::span<const double> x, std::size_t class_count) const;
  bool operator==(const ForestModel&) const = default;
};

struct GaussianNbModel {
  std::vector<double> priors;
  Matrix means;      // class x feature
  Matrix variances;  // class x feature, each >= epsilon
  double epsilon = 0.0;

  /// log P(c) + sum_j log N(x_j; mean_cj, var_cj) for every class.
  std::vector<double> joint_log_likelihood(std::span<const double> x) const;
  /// Normalized posteriors (sum to 1).
  std::vector<double> posterior(std::span<const double> x) const;
  bool operator==(const GaussianNbModel&) const = default;
};

using ModelParameters = std::variant<LinearSvmModel, KnnModel, ForestModel, GaussianNbModel>;

/// A fitted classifier. Immutable once constructed; the constructor checks
/// every parameter invariant.
class TrainedModel {
 public:
  TrainedModel(ClassifierSpec spec, ModelParameters parameters,
               std::vector<std::string> class_names, std::size_t feature_count,
               std::optional<ScalerParams> scaler, Origin origin);

  const ClassifierSpec& spec() const { return spec_; }
  ClassifierKind kind() const { return spec_.kind(); }
  const ModelParameters& parameters() const { return parameters_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t class_count() const { return class_names_.size(); }
  std::size_t feature_count() const { return feature_count_; }
  const std::optional<ScalerParams>& scaler() const { return scaler_; }
  Origin origin() const { return origin_; }

  /// Class index used by score(): 1 (the positive class of binary tasks).
  static constexpr Label positive_class() { return 1; }

  Label predict(std::span<const double> x) const;
  /// Positive-class score: svm margin, knn neighbor fraction, rf vote
  /// fraction, nb posterior. Larger favors the positive class.
  double score(std::span<const double> x) const;

  std::vector<Label> predict_batch(const Matrix& rows) const;
  std::vector<double> score_batch(const Matrix& rows) const;

  bool operator==(const TrainedModel&) const = default;

 private:
  void validate() const;
  /// Applies the scaler when present.
  std::span<const double> prepare(std::span<const double> x, std::vector<double>& buffer) const;

  ClassifierSpec spec_;
  ModelParameters parameters_;
  std::vector<std::string> class_names_;
  std::size_t feature_count_ = 0;
  std::optional<ScalerParams> scaler_;
  Origin origin_ = Origin::teacher_private;
};

/// Trains a model. Deterministic for a fixed spec seed and independent of
/// the thread count.
TrainedModel fit(const ClassifierSpec& spec, const Dataset& train, Origin origin);

// Per-family trainers; inputs are already standardized where the family
// requires it.
LinearSvmModel fit_linear_svm(const SvmParams& params, const Matrix& x, std::span<const Label> y,
                              std::size_t class_count, std::uint64_t seed);
KnnModel fit_knn(const KnnParams& params, const Matrix& x, std::span<const Label> y);
ForestModel fit_forest(const ForestParams& params, const Matrix& x, std::span<const Label> y,
                       std::size_t class_count, std::uint64_t seed);
DecisionTree fit_tree(const ForestParams& params, const Matrix& x, std::span<const Label> y,
                      std::span<const std::size_t> sample, std::size_t class_count,
                      std::uint64_t seed);
GaussianNbModel fit_gaussian_nb(const NaiveBayesParams& params, const Matrix& x,
                                std::span<const Label> y, std::size_t class_count);

/// Regularized hinge objective lambda/2 |w|^2 + mean hinge loss of a binary
/// unit (labels in {0,1}).
double svm_objective(const LinearUnit& unit, double lambda, const Matrix& x,
                     std::span<const Label> y);

}  // namespace mimic
