#include "mimic/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mimic/error.hpp"
#include "mimic/parallel.hpp"

namespace mimic {

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::rf: return "rf";
    case ClassifierKind::nb: return "nb";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (const auto kind : {ClassifierKind::svm, ClassifierKind::knn, ClassifierKind::rf,
                          ClassifierKind::nb}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  throw ConfigError("unknown classifier kind '" + std::string(name) + "'");
}

std::string_view to_string(Origin origin) {
  return origin == Origin::teacher_private ? "teacher-private" : "student-shareable";
}

void ClassifierSpec::validate() const {
  std::visit(Overloaded{
                 [](const SvmParams& p) {
                   if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
                     throw ConfigError("svm lambda must be positive");
                   }
                   if (p.epochs < 1) {
                     throw ConfigError("svm epochs must be >= 1");
                   }
                 },
                 [](const KnnParams& p) {
                   if (p.k < 1) {
                     throw ConfigError("knn k must be >= 1");
                   }
                 },
                 [](const ForestParams& p) {
                   if (p.trees < 1) {
                     throw ConfigError("rf tree count must be >= 1");
                   }
                   if (p.min_samples_split < 2) {
                     throw ConfigError("rf min_samples_split must be >= 2");
                   }
                 },
                 [](const NaiveBayesParams& p) {
                   if (!(p.var_smoothing > 0.0) || !std::isfinite(p.var_smoothing)) {
                     throw ConfigError("nb var_smoothing must be positive");
                   }
                 },
             },
             params);
}

ClassifierSpec ClassifierSpec::defaults(ClassifierKind kind, std::uint64_t seed) {
  switch (kind) {
    case ClassifierKind::svm: return {SvmParams{}, seed};
    case ClassifierKind::knn: return {KnnParams{}, seed};
    case ClassifierKind::rf: return {ForestParams{}, seed};
    case ClassifierKind::nb: return {NaiveBayesParams{}, seed};
  }
  throw ConfigError("unknown classifier kind");
}

// ---------------------------------------------------------------------------
// TrainedModel
// ---------------------------------------------------------------------------

TrainedModel::TrainedModel(ClassifierSpec spec, ModelParameters parameters,
                           std::vector<std::string> class_names, std::size_t feature_count,
                           std::optional<ScalerParams> scaler, Origin origin)
    : spec_(std::move(spec)),
      parameters_(std::move(parameters)),
      class_names_(std::move(class_names)),
      feature_count_(feature_count),
      scaler_(std::move(scaler)),
      origin_(origin) {
  validate();
}

void TrainedModel::validate() const {
  spec_.validate();
  if (spec_.params.index() != parameters_.index()) {
    throw FormatError("hyperparameters and fitted parameters belong to different families");
  }
  const std::size_t classes = class_names_.size();
  if (classes < 2) {
    throw FormatError("a model needs at least two classes");
  }
  if (feature_count_ == 0) {
    throw FormatError("a model needs at least one feature");
  }
  if (scaler_) {
    scaler_->validate();
    if (scaler_->size() != feature_count_) {
      throw FormatError("scaler width does not match the feature count");
    }
  }
  auto finite = [](double v) { return std::isfinite(v); };

  std::visit(
      Overloaded{
          [&](const LinearSvmModel& m) {
            const std::size_t expected = classes == 2 ? 1 : classes;
            if (m.units.size() != expected) {
              throw FormatError("svm has " + std::to_string(m.units.size()) + " units, expected " +
                                std::to_string(expected));
            }
            for (const auto& u : m.units) {
              if (u.weights.size() != feature_count_) {
                throw FormatError("svm weight vector length " + std::to_string(u.weights.size()) +
                                  " does not match feature count " + std::to_string(feature_count_));
              }
              if (!finite(u.bias) || !std::all_of(u.weights.begin(), u.weights.end(), finite)) {
                throw FormatError("svm weights must be finite");
              }
            }
          },
          [&](const KnnModel& m) {
            if (m.points.cols() != feature_count_ || m.labels.size() != m.points.rows()) {
              throw FormatError("knn stored points do not match labels or feature count");
            }
            if (m.k < 1 || m.k > m.points.rows()) {
              throw FormatError("knn k out of range");
            }
            for (const Label y : m.labels) {
              if (y < 0 || static_cast<std::size_t>(y) >= classes) {
                throw FormatError("knn label out of range");
              }
            }
          },
          [&](const ForestModel& m) {
            if (m.trees.empty()) {
              throw FormatError("forest has no trees");
            }
            for (const auto& tree : m.trees) {
              if (tree.nodes.empty()) {
                throw FormatError("forest contains an empty tree");
              }
              const auto n_nodes = static_cast<std::int32_t>(tree.nodes.size());
              for (std::int32_t i = 0; i < n_nodes; ++i) {
                const auto& node = tree.nodes[static_cast<std::size_t>(i)];
                if (node.class_counts.size() != classes) {
                  throw FormatError("tree node class_counts has the wrong length");
                }
                if (node.is_leaf()) {
                  std::uint64_t total = 0;
                  for (const auto c : node.class_counts) {
                    total += c;
                  }
                  if (total < 1) {
                    throw FormatError("tree leaf with zero samples");
                  }
                  continue;
                }
                if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= feature_count_) {
                  throw FormatError("tree split feature out of range");
                }
                // Children after their parent: guarantees termination of walks.
                if (node.left <= i || node.right <= i || node.left >= n_nodes ||
                    node.right >= n_nodes) {
                  throw FormatError("tree child index invalid");
                }
                if (!finite(node.threshold)) {
                  throw FormatError("tree threshold must be finite");
                }
              }
            }
          },
          [&](const GaussianNbModel& m) {
            if (m.priors.size() != classes || m.means.rows() != classes ||
                m.variances.rows() != classes || m.means.cols() != feature_count_ ||
                m.variances.cols() != feature_count_) {
              throw FormatError("naive Bayes parameter shapes do not match");
            }
            if (!(m.epsilon > 0.0)) {
              throw FormatError("naive Bayes epsilon must be positive");
            }
            double sum = 0.0;
            for (const double pr : m.priors) {
              if (!(pr >= 0.0 && pr <= 1.0)) {
                throw FormatError("naive Bayes prior outside [0, 1]");
              }
              sum += pr;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
              throw FormatError("naive Bayes priors sum to " + std::to_string(sum) + ", not 1");
            }
            for (const double v : m.variances.values()) {
              if (!(v >= m.epsilon) || !finite(v)) {
                throw FormatError("naive Bayes variance below epsilon");
              }
            }
            if (!std::all_of(m.means.values().begin(), m.means.values().end(), finite)) {
              throw FormatError("naive Bayes means must be finite");
            }
          },
      },
      parameters_);
}

std::span<const double> TrainedModel::prepare(std::span<const double> x,
                                              std::vector<double>& buffer) const {
  if (x.size() != feature_count_) {
    throw PipelineError("feature row has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(feature_count_));
  }
  if (!scaler_) {
    return x;
  }
  buffer.resize(x.size());
  scale_row(x, *scaler_, buffer);
  return buffer;
}

namespace {

Label vote_with_tiebreak(const std::vector<std::size_t>& votes, std::span<const Label> ranked) {
  const std::size_t best = *std::max_element(votes.begin(), votes.end());
  for (const Label y : ranked) {
    if (votes[static_cast<std::size_t>(y)] == best) {
      return y;
    }
  }
  return 0;
}

}  // namespace

Label TrainedModel::predict(std::span<const double> raw) const {
  std::vector<double> buffer;
  const auto x = prepare(raw, buffer);
  return std::visit(
      Overloaded{
          [&](const LinearSvmModel& m) -> Label {
            if (m.units.size() == 1) {
              return m.units.front().margin(x) > 0.0 ? 1 : 0;
            }
            Label best = 0;
            double best_margin = m.units.front().margin(x);
            for (std::size_t c = 1; c < m.units.size(); ++c) {
              const double v = m.units[c].margin(x);
              if (v > best_margin) {
                best_margin = v;
                best = static_cast<Label>(c);
              }
            }
            return best;
          },
          [&](const KnnModel& m) -> Label {
            const auto nn = m.neighbors(x);
            std::vector<std::size_t> votes(class_count(), 0);
            std::vector<Label> ranked;
            ranked.reserve(nn.size());
            for (const auto i : nn) {
              ++votes[static_cast<std::size_t>(m.labels[i])];
              ranked.push_back(m.labels[i]);
            }
            // Vote ties go to the tied class whose member is nearest.
            return vote_with_tiebreak(votes, ranked);
          },
          [&](const ForestModel& m) -> Label {
            const auto votes = m.votes(x, class_count());
            return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
          },
          [&](const GaussianNbModel& m) -> Label {
            const auto ll = m.joint_log_likelihood(x);
            return static_cast<Label>(std::max_element(ll.begin(), ll.end()) - ll.begin());
          },
      },
      parameters_);
}

double TrainedModel::score(std::span<const double> raw) const {
  std::vector<double> buffer;
  const auto x = prepare(raw, buffer);
  constexpr auto pos = static_cast<std::size_t>(positive_class());
  return std::visit(
      Overloaded{
          [&](const LinearSvmModel& m) {
            return m.units.size() == 1 ? m.units.front().margin(x) : m.units[pos].margin(x);
          },
          [&](const KnnModel& m) {
            const auto nn = m.neighbors(x);
            const auto hits = std::count_if(nn.begin(), nn.end(), [&](std::size_t i) {
              return m.labels[i] == positive_class();
            });
            return static_cast<double>(hits) / static_cast<double>(nn.size());
          },
          [&](const ForestModel& m) {
            const auto votes = m.votes(x, class_count());
            return static_cast<double>(votes[pos]) / static_cast<double>(m.trees.size());
          },
          [&](const GaussianNbModel& m) { return m.posterior(x)[pos]; },
      },
      parameters_);
}

std::vector<Label> TrainedModel::predict_batch(const Matrix& rows) const {
  if (rows.rows() > 0 && rows.cols() != feature_count_) {
    throw PipelineError("batch has " + std::to_string(rows.cols()) + " features, model expects " +
                        std::to_string(feature_count_));
  }
  std::vector<Label> out(rows.rows());
  parallel_for(rows.rows(), [&](std::size_t i) { out[i] = predict(rows.row(i)); });
  return out;
}

std::vector<double> TrainedModel::score_batch(const Matrix& rows) const {
  if (rows.rows() > 0 && rows.cols() != feature_count_) {
    throw PipelineError("batch has " + std::to_string(rows.cols()) + " features, model expects " +
                        std::to_string(feature_count_));
  }
  std::vector<double> out(rows.rows());
  parallel_for(rows.rows(), [&](std::size_t i) { out[i] = score(rows.row(i)); });
  return out;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

TrainedModel fit(const ClassifierSpec& spec, const Dataset& train, Origin origin) {
  spec.validate();
  const auto& y = train.label_values();
  if (train.size() == 0) {
    throw PipelineError("cannot train on an empty dataset");
  }
  if (std::set<Label>(y.begin(), y.end()).size() < 2) {
    throw PipelineError("training set '" + train.source_id + "' contains a single class");
  }
  const std::size_t classes = train.class_count();

  switch (spec.kind()) {
    case ClassifierKind::svm: {
      auto scaler = fit_scaler(train);
      const auto scaled = apply_scaler(train, scaler);
      auto params = fit_linear_svm(std::get<SvmParams>(spec.params), scaled.features, y, classes,
                                   spec.seed);
      return {spec, std::move(params), train.class_names, train.feature_count(), std::move(scaler),
              origin};
    }
    case ClassifierKind::knn: {
      auto scaler = fit_scaler(train);
      const auto scaled = apply_scaler(train, scaler);
      auto params = fit_knn(std::get<KnnParams>(spec.params), scaled.features, y);
      return {spec, std::move(params), train.class_names, train.feature_count(), std::move(scaler),
              origin};
    }
    case ClassifierKind::rf: {
      auto params = fit_forest(std::get<ForestParams>(spec.params), train.features, y, classes,
                               spec.seed);
      return {spec, std::move(params), train.class_names, train.feature_count(), std::nullopt,
              origin};
    }
    case ClassifierKind::nb: {
      auto params = fit_gaussian_nb(std::get<NaiveBayesParams>(spec.params), train.features, y,
                                    classes);
      return {spec, std::move(params), train.class_names, train.feature_count(), std::nullopt,
              origin};
    }
  }
  throw ConfigError("unknown classifier kind");
}

}  // namespace mimic
