#include <algorithm>
#include <cmath>
#include <numeric>

#include "mimic/classifiers.hpp"
#include "mimic/rng.hpp"

namespace mimic {

double LinearUnit::margin(std::span<const double> x) const {
  double m = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    m += weights[j] * x[j];
  }
  return m;
}

namespace {

double unit_objective(const LinearUnit& unit, double lambda, const Matrix& x,
                      std::span<const double> targets) {
  double norm2 = unit.bias * unit.bias;
  for (const double w : unit.weights) {
    norm2 += w * w;
  }
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    hinge += std::max(0.0, 1.0 - targets[i] * unit.margin(x.row(i)));
  }
  return 0.5 * lambda * norm2 + hinge / static_cast<double>(x.rows());
}

/// Pegasos on one binary sub-problem. The bias is handled as the weight of a
/// constant feature, so it is shrunk and projected together with w.
/// At each epoch boundary the iterate is kept only if it lowers the
/// objective, so the returned unit is the best epoch-end iterate.
LinearUnit train_unit(const SvmParams& params, const Matrix& x, std::span<const double> targets,
                      std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const double lambda = params.lambda;
  const double radius = 1.0 / std::sqrt(lambda);

  LinearUnit unit{std::vector<double>(p, 0.0), 0.0};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);

  LinearUnit best = unit;
  double best_objective = unit_objective(unit, lambda, x, targets);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (const std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto xi = x.row(i);
      const double yi = targets[i];
      const double m = yi * unit.margin(xi);
      const double shrink = 1.0 - eta * lambda;
      for (auto& w : unit.weights) {
        w *= shrink;
      }
      unit.bias *= shrink;
      if (m < 1.0) {
        for (std::size_t j = 0; j < p; ++j) {
          unit.weights[j] += eta * yi * xi[j];
        }
        unit.bias += eta * yi;
      }
      double norm2 = unit.bias * unit.bias;
      for (const double w : unit.weights) {
        norm2 += w * w;
      }
      const double norm = std::sqrt(norm2);
      if (norm > radius) {
        const double s = radius / norm;
        for (auto& w : unit.weights) {
          w *= s;
        }
        unit.bias *= s;
      }
    }
    const double objective = unit_objective(unit, lambda, x, targets);
    if (objective < best_objective) {
      best_objective = objective;
      best = unit;
    }
  }
  return best;
}

}  // namespace

LinearSvmModel fit_linear_svm(const SvmParams& params, const Matrix& x, std::span<const Label> y,
                              std::size_t class_count, std::uint64_t seed) {
  LinearSvmModel model;
  const std::size_t n_units = class_count == 2 ? 1 : class_count;
  std::vector<double> targets(y.size());
  for (std::size_t u = 0; u < n_units; ++u) {
    const Label positive = class_count == 2 ? 1 : static_cast<Label>(u);
    for (std::size_t i = 0; i < y.size(); ++i) {
      targets[i] = y[i] == positive ? 1.0 : -1.0;
    }
    model.units.push_back(train_unit(params, x, targets, derive_seed(seed, stage::svm_shuffle, u)));
  }
  return model;
}

double svm_objective(const LinearUnit& unit, double lambda, const Matrix& x,
                     std::span<const Label> y) {
  double norm2 = unit.bias * unit.bias;
  for (const double w : unit.weights) {
    norm2 += w * w;
  }
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double yi = y[i] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - yi * unit.margin(x.row(i)));
  }
  return 0.5 * lambda * norm2 + hinge / static_cast<double>(x.rows());
}

}  // namespace mimic
