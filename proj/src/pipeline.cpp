#include "mimic/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>
#include <set>

#include "mimic/error.hpp"
#include "mimic/parallel.hpp"
#include "mimic/rng.hpp"

namespace mimic {

std::string_view to_string(SelectionMetric metric) {
  return metric == SelectionMetric::accuracy ? "accuracy" : "macro_f1";
}

SelectionMetric parse_selection_metric(std::string_view name) {
  if (name == "accuracy") {
    return SelectionMetric::accuracy;
  }
  if (name == "macro_f1" || name == "macro-f1") {
    return SelectionMetric::macro_f1;
  }
  throw ConfigError("unknown selection metric '" + std::string(name) + "'");
}

std::vector<ClassifierSpec> default_classifiers() {
  return {ClassifierSpec::defaults(ClassifierKind::svm), ClassifierSpec::defaults(ClassifierKind::knn),
          ClassifierSpec::defaults(ClassifierKind::rf), ClassifierSpec::defaults(ClassifierKind::nb)};
}

void PipelineConfig::validate() const {
  if (cv_k < 2) {
    throw ConfigError("cv_k must be >= 2");
  }
  if (classifiers.empty()) {
    throw ConfigError("at least one classifier spec is required");
  }
  for (const auto& spec : classifiers) {
    spec.validate();
  }
  split.validate();
}

// ---------------------------------------------------------------------------
// Racing
// ---------------------------------------------------------------------------

std::optional<std::size_t> select_best(const std::vector<CvReport>& reports, SelectionMetric metric,
                                       const std::vector<bool>& allowed) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!allowed.empty() && !allowed[i]) {
      continue;
    }
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = reports[i];
    const auto& b = reports[*best];
    const double va = a.selection_value(metric);
    const double vb = b.selection_value(metric);
    if (va > vb || (va == vb && a.mean_f1 > b.mean_f1)) {
      best = i;
    }
  }
  return best;
}

std::vector<CvReport> cross_validate(const std::vector<ClassifierSpec>& specs, const Dataset& d,
                                     std::size_t k, std::uint64_t fold_seed) {
  const FoldAssignment folds = kfold(d, k, fold_seed);
  std::vector<std::vector<std::size_t>> train_idx(k);
  std::vector<std::vector<std::size_t>> test_idx(k);
  for (std::size_t f = 0; f < k; ++f) {
    train_idx[f] = folds.train_indices(f);
    test_idx[f] = folds.test_indices(f);
  }

  std::vector<CvReport> reports(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    reports[s].spec = specs[s];
    reports[s].folds.resize(k);
  }
  parallel_for(specs.size() * k, [&](std::size_t task) {
    const std::size_t s = task / k;
    const std::size_t f = task % k;
    const Dataset train = subset(d, train_idx[f]);
    const Dataset held_out = subset(d, test_idx[f]);
    const TrainedModel m = fit(specs[s], train, Origin::teacher_private);
    const auto predicted = m.predict_batch(held_out.features);
    reports[s].folds[f] = macro_metrics(held_out.label_values(), predicted, d.class_count());
  });

  for (auto& r : reports) {
    for (const auto& fold : r.folds) {
      r.mean_accuracy += fold.accuracy;
      r.mean_precision += fold.macro.precision;
      r.mean_recall += fold.macro.recall;
      r.mean_f1 += fold.macro.f1;
    }
    const auto kk = static_cast<double>(k);
    r.mean_accuracy /= kk;
    r.mean_precision /= kk;
    r.mean_recall /= kk;
    r.mean_f1 /= kk;
  }
  return reports;
}

namespace {

std::vector<ClassifierSpec> seeded_specs(const PipelineConfig& cfg, std::uint64_t stage_constant) {
  std::vector<ClassifierSpec> specs = cfg.classifiers;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].seed = derive_seed(cfg.seed, stage_constant, i);
  }
  return specs;
}

RaceResult race(const Dataset& d, const PipelineConfig& cfg, std::uint64_t stage_constant,
                Origin origin) {
  cfg.validate();
  const auto specs = seeded_specs(cfg, stage_constant);
  auto reports = cross_validate(specs, d, cfg.cv_k, derive_seed(cfg.seed, stage_constant));
  const std::size_t winner = *select_best(reports, cfg.selection_metric);
  TrainedModel model = fit(specs[winner], d, origin);
  return RaceResult{std::move(reports), winner, std::move(model)};
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ = (h_ ^ p[i]) * 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void doubles(std::span<const double> vs) {
    for (const double v : vs) {
      f64(v);
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

RaceResult train_teacher(const Dataset& private_set, const PipelineConfig& cfg) {
  return race(private_set, cfg, stage::teacher, Origin::teacher_private);
}

std::string model_id(const TrainedModel& m) {
  Fnv1a h;
  h.u64(static_cast<std::uint64_t>(m.kind()));
  h.u64(m.spec().seed);
  h.u64(m.feature_count());
  if (m.scaler()) {
    h.doubles(m.scaler()->means);
    h.doubles(m.scaler()->std_devs);
  }
  std::visit(
      [&h](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearSvmModel>) {
          for (const auto& u : p.units) {
            h.doubles(u.weights);
            h.f64(u.bias);
          }
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          h.doubles(p.points.values());
          for (const Label y : p.labels) {
            h.u64(static_cast<std::uint64_t>(y));
          }
          h.u64(p.k);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          for (const auto& tree : p.trees) {
            for (const auto& node : tree.nodes) {
              h.u64(static_cast<std::uint64_t>(node.feature));
              h.f64(node.threshold);
              h.u64(static_cast<std::uint64_t>(node.left));
              h.u64(static_cast<std::uint64_t>(node.right));
              for (const auto c : node.class_counts) {
                h.u64(c);
              }
            }
          }
        } else {
          h.doubles(p.priors);
          h.doubles(p.means.values());
          h.doubles(p.variances.values());
          h.f64(p.epsilon);
        }
      },
      m.parameters());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return std::string(to_string(m.kind())) + "-" + buf;
}

AnnotatedDataset annotate(const TrainedModel& teacher, const Dataset& public_pool) {
  if (teacher.origin() != Origin::teacher_private) {
    throw PipelineError("annotation requires a teacher-private model");
  }
  if (public_pool.labeled()) {
    throw PipelineError("public pool '" + public_pool.source_id +
                        "' carries labels; strip them before annotation so true labels cannot "
                        "reach the student");
  }
  if (public_pool.size() > 0 && public_pool.feature_count() != teacher.feature_count()) {
    throw PipelineError("public pool has " + std::to_string(public_pool.feature_count()) +
                        " features, teacher expects " + std::to_string(teacher.feature_count()));
  }
  AnnotatedDataset out;
  out.data = public_pool;
  out.data.class_names = teacher.class_names();
  out.data.labels = teacher.predict_batch(public_pool.features);
  out.teacher_id = model_id(teacher);
  return out;
}

RaceResult train_student(const AnnotatedDataset& annotated, const PipelineConfig& cfg) {
  const auto& ys = annotated.data.label_values();
  const std::set<Label> present(ys.begin(), ys.end());
  if (present.size() < 2) {
    const std::string only =
        present.empty() ? std::string("nothing")
                        : "'" + annotated.data.class_names[static_cast<std::size_t>(*present.begin())] + "'";
    throw PipelineError("degenerate teacher " + annotated.teacher_id + ": annotated pool contains " +
                        only + " only; a student needs at least two classes");
  }
  return race(annotated.data, cfg, stage::student, Origin::student_shareable);
}

FidelityReport evaluate_fidelity(const TrainedModel& teacher, const TrainedModel& student,
                                 const Dataset& test) {
  if (teacher.feature_count() != student.feature_count() ||
      teacher.feature_count() != test.feature_count()) {
    throw PipelineError("feature count mismatch: teacher " + std::to_string(teacher.feature_count()) +
                        ", student " + std::to_string(student.feature_count()) + ", test " +
                        std::to_string(test.feature_count()));
  }
  const auto& truth = test.label_values();
  const auto classes = teacher.class_count();
  const auto t_pred = teacher.predict_batch(test.features);
  const auto s_pred = student.predict_batch(test.features);

  FidelityReport r;
  r.teacher_metrics = macro_metrics(truth, t_pred, classes);
  r.student_metrics = macro_metrics(truth, s_pred, classes);
  std::size_t same = 0;
  for (std::size_t i = 0; i < t_pred.size(); ++i) {
    same += t_pred[i] == s_pred[i] ? 1 : 0;
  }
  r.agreement = t_pred.empty() ? 0.0 : static_cast<double>(same) / static_cast<double>(t_pred.size());
  r.teacher_roc = roc(teacher.score_batch(test.features), truth, TrainedModel::positive_class());
  r.student_roc = roc(student.score_batch(test.features), truth, TrainedModel::positive_class());
  r.deltas.accuracy = r.teacher_metrics.accuracy - r.student_metrics.accuracy;
  r.deltas.precision = r.teacher_metrics.macro.precision - r.student_metrics.macro.precision;
  r.deltas.recall = r.teacher_metrics.macro.recall - r.student_metrics.macro.recall;
  r.deltas.f1 = r.teacher_metrics.macro.f1 - r.student_metrics.macro.f1;
  r.deltas.auc = r.teacher_roc.auc - r.student_roc.auc;
  return r;
}

// ---------------------------------------------------------------------------
// End-to-end
// ---------------------------------------------------------------------------

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

PipelineRun run_split(const SplitResult& split, const PipelineConfig& cfg, Timings timings) {
  cfg.validate();
  Stopwatch clock;

  RaceResult teacher = train_teacher(split.private_set, cfg);
  timings.teacher_seconds = clock.lap();

  const AnnotatedDataset annotated = annotate(teacher.model, split.public_pool);
  timings.annotate_seconds = clock.lap();

  RaceResult student = train_student(annotated, cfg);

  std::vector<std::string> warnings;
  std::optional<TrainedModel> shared;
  std::optional<std::size_t> shared_index;
  if (student.model.kind() != ClassifierKind::knn) {
    shared = student.model;
    shared_index = student.winner;
  } else {
    std::vector<bool> allowed;
    for (const auto& r : student.reports) {
      allowed.push_back(r.spec.kind() != ClassifierKind::knn);
    }
    shared_index = select_best(student.reports, cfg.selection_metric, allowed);
    if (shared_index) {
      shared = fit(student.reports[*shared_index].spec, annotated.data, Origin::student_shareable);
      warnings.push_back("knn won the student race but a knn model is its training data; sharing " +
                         std::string(to_string(shared->kind())) + " instead");
    } else {
      warnings.push_back("knn won the student race and no exportable family was raced; no "
                         "student can be shared");
    }
  }
  timings.student_seconds = clock.lap();

  AnnotationSummary summary;
  summary.pool_size = annotated.data.size();
  summary.label_counts = class_counts(annotated.data);
  summary.teacher_id = annotated.teacher_id;
  const auto& teacher_labels = annotated.data.label_values();
  if (!teacher_labels.empty()) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < teacher_labels.size(); ++i) {
      agree += teacher_labels[i] == split.public_truth.values[i] ? 1 : 0;
    }
    summary.hidden_label_agreement =
        static_cast<double>(agree) / static_cast<double>(teacher_labels.size());
  }

  FidelityReport fidelity =
      evaluate_fidelity(teacher.model, shared ? *shared : student.model, split.test);
  timings.evaluate_seconds = clock.lap();

  return PipelineRun{
      .config = cfg,
      .source_id = split.private_set.source_id,
      .private_rows = split.private_set.row_ids,
      .public_rows = split.public_pool.row_ids,
      .test_rows = split.test.row_ids,
      .teacher = std::move(teacher),
      .annotation = std::move(summary),
      .student = std::move(student),
      .shared_student = std::move(shared),
      .shared_student_index = shared_index,
      .warnings = std::move(warnings),
      .fidelity = std::move(fidelity),
      .timings = timings,
  };
}

}  // namespace

PipelineRun run_pipeline(const SplitResult& split, const PipelineConfig& cfg) {
  return run_split(split, cfg, Timings{});
}

PipelineRun run_pipeline(const Dataset& d, const PipelineConfig& cfg) {
  cfg.validate();
  Stopwatch clock;
  SplitSpec spec = cfg.split;
  spec.seed = cfg.seed;
  const SplitResult split = stratified_split(d, spec);
  Timings timings;
  timings.split_seconds = clock.lap();
  return run_split(split, cfg, timings);
}

}  // namespace mimic
