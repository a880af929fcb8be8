#include "mimic/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "mimic/error.hpp"
#include "mimic/rng.hpp"

namespace mimic {

// ---------------------------------------------------------------------------
// Matrix / Dataset
// ---------------------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DataError("matrix value count " + std::to_string(values_.size()) + " does not match " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

const std::vector<Label>& Dataset::label_values() const {
  if (!labels) {
    throw DataError("dataset '" + source_id + "' is unlabeled");
  }
  return *labels;
}

void Dataset::validate() const {
  if (feature_names.size() != features.cols()) {
    throw DataError("feature_names has " + std::to_string(feature_names.size()) +
                    " entries but the matrix has " + std::to_string(features.cols()) + " columns");
  }
  if (row_ids.size() != features.rows()) {
    throw DataError("row_ids length does not match row count");
  }
  if (labels) {
    if (labels->size() != features.rows()) {
      throw DataError("label count " + std::to_string(labels->size()) + " does not match row count " +
                      std::to_string(features.rows()));
    }
    for (const Label y : *labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= class_names.size()) {
        throw DataError("label index " + std::to_string(y) + " out of range for " +
                        std::to_string(class_names.size()) + " classes");
      }
    }
  }
  for (const double v : features.values()) {
    if (!std::isfinite(v)) {
      throw DataError("dataset '" + source_id + "' contains a non-finite value");
    }
  }
}

Dataset subset(const Dataset& d, std::span<const std::size_t> indices) {
  Dataset out;
  out.features = d.features.select_rows(indices);
  out.feature_names = d.feature_names;
  out.class_names = d.class_names;
  out.source_id = d.source_id;
  out.row_ids.reserve(indices.size());
  for (const auto i : indices) {
    out.row_ids.push_back(d.row_ids[i]);
  }
  if (d.labels) {
    std::vector<Label> ys;
    ys.reserve(indices.size());
    for (const auto i : indices) {
      ys.push_back((*d.labels)[i]);
    }
    out.labels = std::move(ys);
  }
  return out;
}

Dataset strip_labels(const Dataset& d) {
  Dataset out = d;
  out.labels.reset();
  return out;
}

std::vector<std::size_t> class_counts(const Dataset& d) {
  std::vector<std::size_t> counts(d.class_count(), 0);
  for (const Label y : d.label_values()) {
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

LoadResult parse_csv(std::string_view text, const CsvSchema& schema, std::string source_id) {
  // Collect non-blank lines with their 1-based line numbers.
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  {
    std::size_t pos = 0;
    std::size_t lineno = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      ++lineno;
      if (!is_blank(line)) {
        lines.emplace_back(lineno, line);
      }
      if (nl == std::string_view::npos) {
        break;
      }
      pos = nl + 1;
    }
  }
  if (lines.empty()) {
    throw DataError(source_id + ": empty file");
  }

  std::vector<std::string> columns;
  std::size_t first_data = 0;
  if (schema.has_header) {
    for (const auto f : split_fields(lines[0].second)) {
      columns.emplace_back(f);
    }
    first_data = 1;
  } else {
    columns = schema.column_names;
    if (columns.empty()) {
      const auto width = split_fields(lines[0].second).size();
      for (std::size_t c = 0; c < width; ++c) {
        columns.push_back("c" + std::to_string(c));
      }
    }
  }
  if (first_data >= lines.size()) {
    throw DataError(source_id + ": no data rows");
  }

  std::optional<std::size_t> label_col;
  if (!schema.label_column.empty()) {
    const auto it = std::find(columns.begin(), columns.end(), schema.label_column);
    if (it == columns.end()) {
      throw DataError(source_id + ": label column '" + schema.label_column + "' not found");
    }
    label_col = static_cast<std::size_t>(it - columns.begin());
  }
  for (const auto& name : schema.drop_columns) {
    if (std::find(columns.begin(), columns.end(), name) == columns.end()) {
      throw DataError(source_id + ": drop column '" + name + "' not found");
    }
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const bool dropped = std::find(schema.drop_columns.begin(), schema.drop_columns.end(),
                                   columns[c]) != schema.drop_columns.end();
    if (c != label_col && !dropped) {
      feature_cols.push_back(c);
      feature_names.push_back(columns[c]);
    }
  }

  const std::size_t n_rows = lines.size() - first_data;
  const std::size_t n_feat = feature_cols.size();
  std::vector<double> values(n_rows * n_feat, 0.0);
  std::vector<bool> missing(n_rows * n_feat, false);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(label_col ? n_rows : 0);

  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto [lineno, line] = lines[first_data + r];
    const auto fields = split_fields(line);
    if (fields.size() != columns.size()) {
      throw DataError(source_id + ": line " + std::to_string(lineno) + " has " +
                      std::to_string(fields.size()) + " columns, expected " +
                      std::to_string(columns.size()));
    }
    for (std::size_t j = 0; j < n_feat; ++j) {
      const auto cell = fields[feature_cols[j]];
      if (cell.empty() || cell == schema.missing_token) {
        missing[r * n_feat + j] = true;
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError(source_id + ": line " + std::to_string(lineno) + ", column '" +
                        feature_names[j] + "': not a number: '" + std::string(cell) + "'");
      }
      values[r * n_feat + j] = v;
    }
    if (label_col) {
      const auto cell = fields[*label_col];
      if (cell.empty() || cell == schema.missing_token) {
        throw DataError(source_id + ": line " + std::to_string(lineno) + ": missing label");
      }
      raw_labels.emplace_back(cell);
    }
  }

  // Median imputation per column.
  std::size_t imputed = 0;
  for (std::size_t j = 0; j < n_feat; ++j) {
    std::vector<double> present;
    bool any_missing = false;
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (missing[r * n_feat + j]) {
        any_missing = true;
      } else {
        present.push_back(values[r * n_feat + j]);
      }
    }
    if (!any_missing) {
      continue;
    }
    if (present.empty()) {
      throw DataError(source_id + ": column '" + feature_names[j] + "' has no values");
    }
    const double med = median_of(std::move(present));
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (missing[r * n_feat + j]) {
        values[r * n_feat + j] = med;
        ++imputed;
      }
    }
  }

  Dataset d;
  d.features = Matrix(n_rows, n_feat, std::move(values));
  d.feature_names = std::move(feature_names);
  d.source_id = std::move(source_id);
  d.row_ids.resize(n_rows);
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::size_t{0});

  if (label_col) {
    std::vector<std::string> names = schema.class_names;
    if (names.empty()) {
      names = raw_labels;
    } else {
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (std::find(names.begin(), names.end(), raw_labels[r]) == names.end()) {
          throw DataError(d.source_id + ": line " + std::to_string(lines[first_data + r].first) +
                          ": unknown label value '" + raw_labels[r] + "'");
        }
      }
    }
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    if (schema.positive_class) {
      const auto it = std::find(names.begin(), names.end(), *schema.positive_class);
      if (it == names.end()) {
        throw DataError(d.source_id + ": positive class '" + *schema.positive_class +
                        "' does not occur in the label column");
      }
      if (names.size() == 2 && it == names.begin()) {
        std::swap(names[0], names[1]);
      }
    }
    std::map<std::string, Label> index;
    for (std::size_t c = 0; c < names.size(); ++c) {
      index.emplace(names[c], static_cast<Label>(c));
    }
    std::vector<Label> ys;
    ys.reserve(n_rows);
    for (const auto& s : raw_labels) {
      ys.push_back(index.at(s));
    }
    d.class_names = std::move(names);
    d.labels = std::move(ys);
  }
  d.validate();
  return {std::move(d), imputed};
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, path.filename().string());
}

std::string to_csv(const Dataset& d, std::string_view label_column) {
  std::string out;
  for (std::size_t j = 0; j < d.feature_names.size(); ++j) {
    if (j > 0) {
      out += ',';
    }
    out += d.feature_names[j];
  }
  if (d.labeled()) {
    out += ',';
    out += label_column;
  }
  out += '\n';
  for (std::size_t r = 0; r < d.size(); ++r) {
    const auto row = d.features.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) {
        out += ',';
      }
      out += format_double(row[j]);
    }
    if (d.labeled()) {
      out += ',';
      out += d.class_names[static_cast<std::size_t>((*d.labels)[r])];
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path, std::string_view label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write '" + path.string() + "'");
  }
  out << to_csv(d, label_column);
}

// ---------------------------------------------------------------------------
// Scaler
// ---------------------------------------------------------------------------

void ScalerParams::validate() const {
  if (means.size() != std_devs.size()) {
    throw DataError("scaler means and std_devs differ in length");
  }
  for (const double s : std_devs) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw DataError("scaler std_dev must be positive and finite");
    }
  }
  for (const double m : means) {
    if (!std::isfinite(m)) {
      throw DataError("scaler mean must be finite");
    }
  }
}

ScalerParams fit_scaler(const Dataset& d) {
  if (d.size() == 0) {
    throw DataError("cannot fit a scaler on an empty dataset");
  }
  const std::size_t n = d.size();
  const std::size_t p = d.feature_count();
  ScalerParams s{std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += d.features(r, j);
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dev = d.features(r, j) - mean;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.means[j] = mean;
    s.std_devs[j] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
  }
  return s;
}

void scale_row(std::span<const double> in, const ScalerParams& s, std::span<double> out) {
  for (std::size_t j = 0; j < in.size(); ++j) {
    out[j] = (in[j] - s.means[j]) / s.std_devs[j];
  }
}

Dataset apply_scaler(const Dataset& d, const ScalerParams& s) {
  if (s.size() != d.feature_count()) {
    throw DataError("scaler has " + std::to_string(s.size()) + " columns, dataset has " +
                    std::to_string(d.feature_count()));
  }
  Dataset out = d;
  for (std::size_t r = 0; r < out.size(); ++r) {
    scale_row(d.features.row(r), s, out.features.row(r));
  }
  return out;
}

Dataset invert_scaler(const Dataset& d, const ScalerParams& s) {
  if (s.size() != d.feature_count()) {
    throw DataError("scaler has " + std::to_string(s.size()) + " columns, dataset has " +
                    std::to_string(d.feature_count()));
  }
  Dataset out = d;
  for (std::size_t r = 0; r < out.size(); ++r) {
    auto row = out.features.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = row[j] * s.std_devs[j] + s.means[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

void SplitSpec::validate() const {
  for (const double f : {private_fraction, public_fraction, test_fraction}) {
    if (!(f > 0.0 && f < 1.0)) {
      throw ConfigError("split fractions must lie in (0, 1)");
    }
  }
  if (std::abs(private_fraction + public_fraction + test_fraction - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
}

namespace {

std::vector<std::vector<std::size_t>> rows_by_class(const Dataset& d) {
  std::vector<std::vector<std::size_t>> by_class(d.class_count());
  const auto& ys = d.label_values();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    by_class[static_cast<std::size_t>(ys[i])].push_back(i);
  }
  return by_class;
}

/// Largest-remainder apportionment of n items to the given fractions.
/// Equal remainders go to the earlier part.
std::vector<std::size_t> apportion(std::size_t n, std::span<const double> fractions) {
  std::vector<std::size_t> counts(fractions.size());
  std::vector<double> remainders(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < fractions.size(); ++p) {
    const double exact = fractions[p] * static_cast<double>(n);
    counts[p] = static_cast<std::size_t>(std::floor(exact));
    remainders[p] = exact - static_cast<double>(counts[p]);
    assigned += counts[p];
  }
  std::vector<std::size_t> order(fractions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    ++counts[order[i % order.size()]];
  }
  return counts;
}

}  // namespace

SplitResult stratified_split(const Dataset& d, const SplitSpec& spec) {
  spec.validate();
  const auto by_class = rows_by_class(d);
  const std::array<double, 3> fractions{spec.private_fraction, spec.public_fraction,
                                        spec.test_fraction};
  std::array<std::vector<std::size_t>, 3> parts;

  Rng rng(derive_seed(spec.seed, stage::split));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto rows = by_class[c];
    if (rows.empty()) {
      continue;
    }
    if (rows.size() < 3) {
      throw DataError("class '" + d.class_names[c] + "' has " + std::to_string(rows.size()) +
                      " samples; at least 3 are needed for a three-way split");
    }
    rng.shuffle(std::span(rows));
    auto counts = apportion(rows.size(), fractions);
    // Every part receives at least one sample of every class.
    for (auto& cnt : counts) {
      if (cnt == 0) {
        auto largest = std::max_element(counts.begin(), counts.end());
        --*largest;
        cnt = 1;
      }
    }
    std::size_t offset = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      parts[p].insert(parts[p].end(), rows.begin() + static_cast<std::ptrdiff_t>(offset),
                      rows.begin() + static_cast<std::ptrdiff_t>(offset + counts[p]));
      offset += counts[p];
    }
  }
  for (auto& part : parts) {
    std::sort(part.begin(), part.end());
  }

  SplitResult out;
  out.private_set = subset(d, parts[0]);
  Dataset pub = subset(d, parts[1]);
  out.public_truth.values = std::move(*pub.labels);
  pub.labels.reset();
  out.public_pool = std::move(pub);
  out.test = subset(d, parts[2]);
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_sample.size(); ++i) {
    if (fold_of_sample[i] != fold) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_sample.size(); ++i) {
    if (fold_of_sample[i] == fold) {
      out.push_back(i);
    }
  }
  return out;
}

FoldAssignment kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
  if (k < 2) {
    throw ConfigError("k-fold needs k >= 2, got " + std::to_string(k));
  }
  auto by_class = rows_by_class(d);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && by_class[c].size() < k) {
      throw DataError("class '" + d.class_names[c] + "' has " + std::to_string(by_class[c].size()) +
                      " samples, fewer than k = " + std::to_string(k));
    }
  }
  Rng rng(derive_seed(seed, stage::folds));
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of_sample.assign(d.size(), 0);
  std::size_t position = 0;
  for (auto& rows : by_class) {
    rng.shuffle(std::span(rows));
    for (const auto i : rows) {
      fa.fold_of_sample[i] = position % k;
      ++position;
    }
  }
  return fa;
}

// ---------------------------------------------------------------------------
// Synthetic cardiovascular-like data
// ---------------------------------------------------------------------------

Dataset make_synthetic_cardiovascular(std::size_t rows, std::uint64_t seed) {
  Rng rng(derive_seed(seed, stage::synthetic));
  auto categorical = [&rng](double p1, double p2) {
    const double u = rng.uniform01();
    return u < p1 ? 1.0 : (u < p1 + p2 ? 2.0 : 3.0);
  };
  auto bernoulli = [&rng](double p) { return rng.uniform01() < p ? 1.0 : 0.0; };

  Dataset d;
  d.feature_names = {"age",         "gender", "height", "weight", "ap_hi", "ap_lo",
                     "cholesterol", "gluc",   "smoke",  "alco",   "active"};
  d.class_names = {"0", "1"};
  d.source_id = "synthetic-cardiovascular";
  d.features = Matrix(rows, d.feature_names.size());
  std::vector<Label> ys(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double age = std::round(std::clamp(53.0 + 6.8 * rng.normal(), 30.0, 65.0));
    const double gender = bernoulli(0.35) + 1.0;
    const double height = std::round(164.0 + (gender == 2.0 ? 8.0 : 0.0) + 7.0 * rng.normal());
    const double weight = std::round(74.0 + 0.3 * (height - 164.0) + 13.0 * rng.normal());
    const double ap_hi = std::round(10.0 * std::round((127.0 + 17.0 * rng.normal()) / 10.0));
    const double ap_lo = std::round(10.0 * std::round((0.55 * ap_hi + 11.0 + 8.0 * rng.normal()) / 10.0));
    const double chol = categorical(0.75, 0.135);
    const double gluc = categorical(0.85, 0.075);
    const double smoke = bernoulli(gender == 2.0 ? 0.2 : 0.03);
    const double alco = bernoulli(0.05);
    const double active = bernoulli(0.8);

    const double bmi = weight / ((height / 100.0) * (height / 100.0));
    const double logit = -0.15 + 0.055 * (age - 53.0) + 0.05 * (ap_hi - 127.0) +
                         0.035 * (bmi - 27.0) + 0.45 * (chol - 1.0) + 0.1 * (gluc - 1.0) -
                         0.2 * active - 0.1 * smoke + (ap_hi >= 140.0 ? 0.6 : 0.0);
    const double p = 1.0 / (1.0 + std::exp(-logit));
    ys[r] = rng.uniform01() < p ? 1 : 0;

    // Entry errors as seen in examination records: the label follows the
    // true readings, the features carry what was typed in.
    double rec_hi = ap_hi;
    double rec_lo = ap_lo;
    double rec_height = height;
    if (rng.uniform01() < 0.02) {
      const double u = rng.uniform01();
      if (u < 0.4) {
        rec_lo *= 10.0;
      } else if (u < 0.7) {
        std::swap(rec_hi, rec_lo);
      } else if (u < 0.85) {
        rec_hi = -rec_hi;
      } else {
        rec_hi /= 10.0;
      }
    }
    if (rng.uniform01() < 0.005) {
      rec_height = std::round(rec_height / 2.0);
    }

    const double row[] = {age, gender, rec_height, weight, rec_hi, rec_lo, chol, gluc, smoke, alco, active};
    std::copy(std::begin(row), std::end(row), d.features.row(r).begin());
  }
  d.labels = std::move(ys);
  d.row_ids.resize(rows);
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::size_t{0});
  d.validate();
  return d;
}

}  // namespace mimic
