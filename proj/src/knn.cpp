#include <algorithm>
#include <numeric>

#include "mimic/classifiers.hpp"
#include "mimic/error.hpp"

namespace mimic {

KnnModel fit_knn(const KnnParams& params, const Matrix& x, std::span<const Label> y) {
  if (params.k > x.rows()) {
    throw ConfigError("knn k = " + std::to_string(params.k) + " exceeds the " +
                      std::to_string(x.rows()) + " training samples");
  }
  return KnnModel{x, std::vector<Label>(y.begin(), y.end()), params.k};
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> x) const {
  const std::size_t n = points.rows();
  // Squared distances order identically to Euclidean distances.
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = points.row(i);
    double d2 = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double diff = p[j] - x[j];
      d2 += diff * diff;
    }
    dist[i] = {d2, i};
  }
  const auto kth = dist.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(dist.begin(), kth, dist.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (auto it = dist.begin(); it != kth; ++it) {
    out.push_back(it->second);
  }
  return out;
}

}  // namespace mimic
