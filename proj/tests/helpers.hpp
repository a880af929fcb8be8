#pragma once

#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "mimic/data.hpp"
#include "mimic/rng.hpp"

namespace mimic::test {

inline std::filesystem::path data_dir() { return MIMIC_DATA_DIR; }

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, std::vector<Label> labels,
                            std::vector<std::string> class_names = {"0", "1"}) {
  Dataset d;
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  d.features = Matrix(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      d.features(r, c) = rows[r][c];
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    d.feature_names.push_back("f" + std::to_string(c));
  }
  d.labels = std::move(labels);
  d.class_names = std::move(class_names);
  d.source_id = "test";
  d.row_ids.resize(rows.size());
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::size_t{0});
  d.validate();
  return d;
}

/// Gaussian blobs: class c centered at c * separation on every feature.
inline Dataset make_blobs(std::size_t n, std::size_t features, std::size_t classes,
                          double separation, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(features));
  std::vector<Label> labels(n);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) {
    names.push_back("c" + std::to_string(c));
  }
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<Label>(i % classes);
    for (auto& v : rows[i]) {
      v = static_cast<double>(labels[i]) * separation + rng.normal();
    }
  }
  return make_dataset(rows, labels, names);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mimic_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mimic::test
