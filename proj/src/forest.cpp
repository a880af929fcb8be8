#include <algorithm>
#include <cmath>
#include <numeric>

#include "mimic/classifiers.hpp"
#include "mimic/parallel.hpp"
#include "mimic/rng.hpp"

namespace mimic {

Label TreeNode::majority() const {
  const auto it = std::max_element(class_counts.begin(), class_counts.end());
  return static_cast<Label>(it - class_counts.begin());
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    const auto f = static_cast<std::size_t>(node->feature);
    node = &nodes[static_cast<std::size_t>(x[f] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

std::vector<std::size_t> ForestModel::votes(std::span<const double> x,
                                            std::size_t class_count) const {
  std::vector<std::size_t> v(class_count, 0);
  for (const auto& tree : trees) {
    ++v[static_cast<std::size_t>(tree.predict(x))];
  }
  return v;
}

namespace {

__extension__ typedef unsigned __int128 Wide;

/// Split quality as the exact rational sum_c l_c^2 / n_l + sum_c r_c^2 / n_r
/// (larger is purer; maximizing it minimizes weighted Gini impurity).
struct Purity {
  Wide numerator = 0;
  Wide denominator = 1;

  bool better_than(const Purity& other) const {
    return numerator * other.denominator > other.numerator * denominator;
  }
};

Purity split_purity(std::span<const std::uint64_t> left, std::uint64_t n_left,
                    std::span<const std::uint64_t> right, std::uint64_t n_right) {
  Wide a = 0;
  Wide b = 0;
  for (const auto c : left) {
    a += Wide{c} * c;
  }
  for (const auto c : right) {
    b += Wide{c} * c;
  }
  return {a * n_right + b * n_left, Wide{n_left} * n_right};
}

class TreeBuilder {
 public:
  TreeBuilder(const ForestParams& params, const Matrix& x, std::span<const Label> y,
              std::size_t class_count, std::uint64_t seed)
      : params_(params),
        x_(x),
        y_(y),
        class_count_(class_count),
        rng_(seed),
        candidates_(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))))) {
    candidates_ = std::clamp<std::size_t>(candidates_, 1, x.cols());
  }

  DecisionTree build(std::vector<std::size_t> sample) {
    DecisionTree tree;
    tree.nodes.reserve(2 * sample.size() + 1);
    grow(tree, sample, 0);
    return tree;
  }

 private:
  struct Split {
    std::int32_t feature = TreeNode::kLeaf;
    double threshold = 0.0;
    Purity purity{};
  };

  std::int32_t grow(DecisionTree& tree, std::vector<std::size_t>& sample, std::size_t depth) {
    const auto index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode node;
    node.class_counts.assign(class_count_, 0);
    for (const auto i : sample) {
      ++node.class_counts[static_cast<std::size_t>(y_[i])];
    }
    const auto nonzero = std::count_if(node.class_counts.begin(), node.class_counts.end(),
                                       [](std::uint32_t c) { return c > 0; });
    const bool stop = depth >= params_.max_depth || sample.size() < params_.min_samples_split ||
                      nonzero <= 1;
    if (!stop) {
      const Split split = best_split(sample);
      if (split.feature != TreeNode::kLeaf) {
        const auto f = static_cast<std::size_t>(split.feature);
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (const auto i : sample) {
          (x_(i, f) <= split.threshold ? left : right).push_back(i);
        }
        sample.clear();
        sample.shrink_to_fit();
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = grow(tree, left, depth + 1);
        node.right = grow(tree, right, depth + 1);
      }
    }
    tree.nodes[static_cast<std::size_t>(index)] = std::move(node);
    return index;
  }

  std::vector<std::size_t> draw_features() {
    std::vector<std::size_t> all(x_.cols());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < candidates_; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.uniform_index(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(candidates_);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const std::vector<std::size_t>& sample) {
    Split best;
    bool found = false;
    std::vector<std::pair<double, Label>> column(sample.size());
    std::vector<std::uint64_t> left(class_count_);
    std::vector<std::uint64_t> right(class_count_);
    for (const std::size_t f : draw_features()) {
      for (std::size_t i = 0; i < sample.size(); ++i) {
        column[i] = {x_(sample[i], f), y_[sample[i]]};
      }
      std::sort(column.begin(), column.end());
      std::fill(left.begin(), left.end(), 0);
      std::fill(right.begin(), right.end(), 0);
      for (const auto& [v, label] : column) {
        ++right[static_cast<std::size_t>(label)];
      }
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto c = static_cast<std::size_t>(column[i].second);
        ++left[c];
        --right[c];
        if (column[i].first == column[i + 1].first) {
          continue;
        }
        const Purity purity = split_purity(left, i + 1, right, column.size() - i - 1);
        if (!found || purity.better_than(best.purity)) {
          found = true;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = 0.5 * (column[i].first + column[i + 1].first);
          best.purity = purity;
        }
      }
    }
    return best;
  }

  const ForestParams& params_;
  const Matrix& x_;
  std::span<const Label> y_;
  std::size_t class_count_;
  Rng rng_;
  std::size_t candidates_;
};

}  // namespace

DecisionTree fit_tree(const ForestParams& params, const Matrix& x, std::span<const Label> y,
                      std::span<const std::size_t> sample, std::size_t class_count,
                      std::uint64_t seed) {
  TreeBuilder builder(params, x, y, class_count, seed);
  return builder.build(std::vector<std::size_t>(sample.begin(), sample.end()));
}

ForestModel fit_forest(const ForestParams& params, const Matrix& x, std::span<const Label> y,
                       std::size_t class_count, std::uint64_t seed) {
  ForestModel forest;
  forest.trees.resize(params.trees);
  const std::size_t n = x.rows();
  parallel_for(params.trees, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(seed, stage::forest, t);
    Rng rng(tree_seed);
    std::vector<std::size_t> bootstrap(n);
    for (auto& i : bootstrap) {
      i = static_cast<std::size_t>(rng.uniform_index(n));
    }
    forest.trees[t] = fit_tree(params, x, y, bootstrap, class_count, splitmix64(tree_seed));
  });
  return forest;
}

}  // namespace mimic
