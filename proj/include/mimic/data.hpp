#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mimic {

using Label = std::int32_t;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

  std::span<const double> values() const { return values_; }

  /// Rows selected by index, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Labeled or unlabeled tabular data. Labels are indices into class_names.
/// row_ids track each sample back to its line in the source file so splits
/// can be audited.
struct Dataset {
  Matrix features;
  std::vector<std::string> feature_names;
  std::optional<std::vector<Label>> labels;
  std::vector<std::string> class_names;
  std::string source_id;
  std::vector<std::size_t> row_ids;

  std::size_t size() const { return features.rows(); }
  std::size_t feature_count() const { return features.cols(); }
  std::size_t class_count() const { return class_names.size(); }
  bool labeled() const { return labels.has_value(); }

  /// Labels or throws DataError when the dataset is unlabeled.
  const std::vector<Label>& label_values() const;

  /// Throws DataError when any invariant is violated.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

/// Rows of d selected by index (labels and row ids follow the rows).
Dataset subset(const Dataset& d, std::span<const std::size_t> indices);

/// Copy of d with labels removed.
Dataset strip_labels(const Dataset& d);

/// Per-class sample counts (size = class_count()).
std::vector<std::size_t> class_counts(const Dataset& d);

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

struct CsvSchema {
  /// Name of the label column. Empty means the file is unlabeled.
  std::string label_column;
  /// Binary tasks: this class is mapped to index 1.
  std::optional<std::string> positive_class;
  std::string missing_token = "?";
  bool has_header = true;
  /// Column names for header-less files (required when has_header is false).
  std::vector<std::string> column_names;
  /// Columns ignored entirely, e.g. record identifiers.
  std::vector<std::string> drop_columns;
  /// When non-empty, every label must be one of these.
  std::vector<std::string> class_names;
};

struct LoadResult {
  Dataset dataset;
  std::size_t imputed_cells = 0;
};

/// Parses CSV text. Missing cells are imputed with the column median of the
/// non-missing values. source_id is stored verbatim in the dataset.
LoadResult parse_csv(std::string_view text, const CsvSchema& schema, std::string source_id);

/// Reads and parses a CSV file; source_id is the file name.
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Serializes with a header row; the label column (if any) is written last
/// under label_column, using class names. Values use the shortest decimal
/// form that round-trips.
std::string to_csv(const Dataset& d, std::string_view label_column = "label");
void write_csv(const Dataset& d, const std::filesystem::path& path,
               std::string_view label_column = "label");

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

struct ScalerParams {
  std::vector<double> means;
  std::vector<double> std_devs;

  std::size_t size() const { return means.size(); }
  void validate() const;
  bool operator==(const ScalerParams&) const = default;
};

/// Column means and population standard deviations. Zero-variance columns
/// get std_dev 1.
ScalerParams fit_scaler(const Dataset& d);
Dataset apply_scaler(const Dataset& d, const ScalerParams& s);
Dataset invert_scaler(const Dataset& d, const ScalerParams& s);
void scale_row(std::span<const double> in, const ScalerParams& s, std::span<double> out);

// ---------------------------------------------------------------------------
// Splits and folds
// ---------------------------------------------------------------------------

struct SplitSpec {
  double private_fraction = 0.5;
  double public_fraction = 0.3;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Labels of the public pool, held back for evaluation only. Nothing on the
/// student side of the pipeline accepts this type.
struct HiddenLabels {
  std::vector<Label> values;
};

struct SplitResult {
  Dataset private_set;
  Dataset public_pool;  // unlabeled
  HiddenLabels public_truth;
  Dataset test;
};

/// Three-way stratified split. Within each class the rows are shuffled and
/// divided by largest-remainder rounding of the fractions; each part keeps
/// its rows in original order.
SplitResult stratified_split(const Dataset& d, const SplitSpec& spec);

struct FoldAssignment {
  std::vector<std::size_t> fold_of_sample;
  std::size_t k = 0;

  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> test_indices(std::size_t fold) const;
};

inline constexpr std::size_t kDefaultFolds = 10;

/// Stratified k-fold assignment: per-class shuffled runs are concatenated in
/// class order and dealt round-robin, so both per-class and total fold sizes
/// differ by at most one.
FoldAssignment kfold(const Dataset& d, std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Low-separability stand-in for the cardiovascular examination data:
/// eleven features shaped like (age, gender, height, weight, ap_hi, ap_lo,
/// cholesterol, gluc, smoke, alco, active) and a noisy logistic label.
/// About 2% of rows carry blood-pressure entry errors (x10, swapped,
/// negated, /10) and 0.5% a mistyped height; labels follow the true values.
Dataset make_synthetic_cardiovascular(std::size_t rows, std::uint64_t seed);

}  // namespace mimic
