#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mimic/classifiers.hpp"

namespace mimic {

GaussianNbModel fit_gaussian_nb(const NaiveBayesParams& params, const Matrix& x,
                                std::span<const Label> y, std::size_t class_count) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();

  // epsilon scales with the widest feature, as in common Gaussian NB practice.
  double max_var = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += x(i, j);
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      var += (x(i, j) - mean) * (x(i, j) - mean);
    }
    max_var = std::max(max_var, var / static_cast<double>(n));
  }

  GaussianNbModel m;
  m.epsilon = params.var_smoothing * (max_var > 0.0 ? max_var : 1.0);
  m.priors.assign(class_count, 0.0);
  m.means = Matrix(class_count, p, 0.0);
  m.variances = Matrix(class_count, p, 0.0);

  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    ++counts[c];
    for (std::size_t j = 0; j < p; ++j) {
      m.means(c, j) += x(i, j);
    }
  }
  for (std::size_t c = 0; c < class_count; ++c) {
    m.priors[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) {
      m.means(c, j) = counts[c] > 0 ? m.means(c, j) / static_cast<double>(counts[c]) : 0.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t j = 0; j < p; ++j) {
      const double d = x(i, j) - m.means(c, j);
      m.variances(c, j) += d * d;
    }
  }
  for (std::size_t c = 0; c < class_count; ++c) {
    for (std::size_t j = 0; j < p; ++j) {
      // Absent classes get a unit Gaussian; their zero prior keeps them unused.
      m.variances(c, j) = counts[c] > 0 ? m.variances(c, j) / static_cast<double>(counts[c]) + m.epsilon
                                        : 1.0 + m.epsilon;
    }
  }
  return m;
}

std::vector<double> GaussianNbModel::joint_log_likelihood(std::span<const double> x) const {
  const std::size_t classes = priors.size();
  std::vector<double> out(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (priors[c] <= 0.0) {
      out[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double ll = std::log(priors[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = variances(c, j);
      const double d = x[j] - means(c, j);
      ll += -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
    }
    out[c] = ll;
  }
  return out;
}

std::vector<double> GaussianNbModel::posterior(std::span<const double> x) const {
  auto ll = joint_log_likelihood(x);
  const double top = *std::max_element(ll.begin(), ll.end());
  double total = 0.0;
  for (auto& v : ll) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : ll) {
    v /= total;
  }
  return ll;
}

}  // namespace mimic
