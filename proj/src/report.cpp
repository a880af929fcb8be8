#include "mimic/report.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mimic/error.hpp"

namespace mimic {

Json to_json(const ConfusionMatrix& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

Json to_json(const ClassScores& s) {
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"precision_undefined", s.precision_undefined},
          {"recall_undefined", s.recall_undefined}};
}

Json to_json(const MetricsReport& r) {
  Json per_class = Json::array();
  for (const auto& s : r.per_class) {
    per_class.push_back(to_json(s));
  }
  return {{"n", r.n},
          {"accuracy", r.accuracy},
          {"positive_class_index", r.positive},
          {"confusion", to_json(r.confusion)},
          {"positive_class", to_json(r.positive_class)},
          {"macro", to_json(r.macro)},
          {"per_class", std::move(per_class)}};
}

Json to_json(const RocCurve& c) {
  Json points = Json::array();
  for (const auto& p : c.points) {
    points.push_back(Json::array(
        {p.fpr, p.tpr, std::isinf(p.threshold) ? Json(nullptr) : Json(p.threshold)}));
  }
  return {{"auc", c.auc}, {"points", std::move(points)}};
}

Json to_json(const ClassifierSpec& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind()));
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SvmParams>) {
          j["lambda"] = p.lambda;
          j["epochs"] = p.epochs;
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          j["k"] = p.k;
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          j["trees"] = p.trees;
          j["max_depth"] = p.max_depth;
          j["min_samples_split"] = p.min_samples_split;
        } else {
          j["var_smoothing"] = p.var_smoothing;
        }
      },
      s.params);
  j["seed"] = s.seed;
  return j;
}

Json to_json(const CvReport& r) {
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"accuracy", f.accuracy},
                     {"macro_precision", f.macro.precision},
                     {"macro_recall", f.macro.recall},
                     {"macro_f1", f.macro.f1},
                     {"n", f.n}});
  }
  return {{"spec", to_json(r.spec)},
          {"mean_accuracy", r.mean_accuracy},
          {"mean_macro_precision", r.mean_precision},
          {"mean_macro_recall", r.mean_recall},
          {"mean_macro_f1", r.mean_f1},
          {"folds", std::move(folds)}};
}

Json to_json(const FidelityReport& f) {
  return {{"teacher_metrics", to_json(f.teacher_metrics)},
          {"student_metrics", to_json(f.student_metrics)},
          {"agreement", f.agreement},
          {"deltas",
           {{"accuracy", f.deltas.accuracy},
            {"macro_precision", f.deltas.precision},
            {"macro_recall", f.deltas.recall},
            {"macro_f1", f.deltas.f1},
            {"auc", f.deltas.auc}}},
          {"teacher_roc", to_json(f.teacher_roc)},
          {"student_roc", to_json(f.student_roc)}};
}

Json to_json(const PipelineConfig& cfg) {
  Json specs = Json::array();
  for (const auto& s : cfg.classifiers) {
    Json j = to_json(s);
    j.erase("seed");
    specs.push_back(std::move(j));
  }
  return {{"classifiers", std::move(specs)},
          {"cv_k", cfg.cv_k},
          {"selection_metric", std::string(to_string(cfg.selection_metric))},
          {"seed", cfg.seed},
          {"split",
           {{"private_fraction", cfg.split.private_fraction},
            {"public_fraction", cfg.split.public_fraction},
            {"test_fraction", cfg.split.test_fraction}}}};
}

namespace {

Json model_summary(const TrainedModel& m, std::size_t index) {
  return {{"index", index},
          {"kind", std::string(to_string(m.kind()))},
          {"spec", to_json(m.spec())},
          {"origin", std::string(to_string(m.origin()))},
          {"feature_count", m.feature_count()},
          {"class_names", m.class_names()}};
}

Json race_to_json(const RaceResult& race, SelectionMetric metric) {
  Json reports = Json::array();
  for (const auto& r : race.reports) {
    reports.push_back(to_json(r));
  }
  return {{"reports", std::move(reports)},
          {"selection_metric", std::string(to_string(metric))},
          {"selected", model_summary(race.model, race.winner)},
          {"selected_value", race.reports[race.winner].selection_value(metric)}};
}

}  // namespace

Json to_json(const PipelineRun& run, bool include_timings) {
  Json j;
  j["source_id"] = run.source_id;
  j["config"] = to_json(run.config);
  j["split"] = {{"seed", run.config.seed},
                {"private_rows", run.private_rows},
                {"public_rows", run.public_rows},
                {"test_rows", run.test_rows}};
  j["teacher"] = race_to_json(run.teacher, run.config.selection_metric);
  j["annotation"] = {{"pool_size", run.annotation.pool_size},
                     {"label_counts", run.annotation.label_counts},
                     {"teacher_id", run.annotation.teacher_id},
                     {"hidden_label_agreement", run.annotation.hidden_label_agreement}};
  j["student"] = race_to_json(run.student, run.config.selection_metric);
  if (run.shared_student) {
    j["shared_student"] = model_summary(*run.shared_student, *run.shared_student_index);
  } else {
    j["shared_student"] = nullptr;
  }
  j["warnings"] = run.warnings;
  j["fidelity"] = to_json(run.fidelity);
  if (include_timings) {
    j["timings"] = {{"split_seconds", run.timings.split_seconds},
                    {"teacher_seconds", run.timings.teacher_seconds},
                    {"annotate_seconds", run.timings.annotate_seconds},
                    {"student_seconds", run.timings.student_seconds},
                    {"evaluate_seconds", run.timings.evaluate_seconds}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> known) {
  if (!obj.is_object()) {
    throw ConfigError("'" + where + "' must be an object");
  }
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <class T>
T value_of(const Json& obj, const char* key, const std::string& where, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    return fallback;
  }
  const std::string name = where.empty() ? key : where + "." + key;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) {
        throw ConfigError("config key '" + name + "' must be a boolean");
      }
    } else if constexpr (std::is_unsigned_v<T>) {
      if (it->is_number_integer() && it->template get<std::int64_t>() < 0) {
        throw ConfigError("config key '" + name + "' must be non-negative");
      }
      if (!it->is_number_integer()) {
        throw ConfigError("config key '" + name + "' must be an integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) {
        throw ConfigError("config key '" + name + "' must be a number");
      }
    }
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + name + "' has the wrong type");
  }
}

ClassifierSpec spec_from_json(const Json& j, const std::string& where) {
  if (j.is_string()) {
    return ClassifierSpec::defaults(parse_classifier_kind(j.get<std::string>()));
  }
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("config key '" + where + ".kind' is required and must be a string");
  }
  const ClassifierKind kind = parse_classifier_kind(j.at("kind").get<std::string>());
  ClassifierSpec spec = ClassifierSpec::defaults(kind);
  switch (kind) {
    case ClassifierKind::svm: {
      check_keys(j, where, {"kind", "lambda", "epochs"});
      auto& p = std::get<SvmParams>(spec.params);
      p.lambda = value_of<double>(j, "lambda", where, p.lambda);
      p.epochs = value_of<std::size_t>(j, "epochs", where, p.epochs);
      break;
    }
    case ClassifierKind::knn: {
      check_keys(j, where, {"kind", "k"});
      auto& p = std::get<KnnParams>(spec.params);
      p.k = value_of<std::size_t>(j, "k", where, p.k);
      break;
    }
    case ClassifierKind::rf: {
      check_keys(j, where, {"kind", "trees", "max_depth", "min_samples_split"});
      auto& p = std::get<ForestParams>(spec.params);
      p.trees = value_of<std::size_t>(j, "trees", where, p.trees);
      p.max_depth = value_of<std::size_t>(j, "max_depth", where, p.max_depth);
      p.min_samples_split = value_of<std::size_t>(j, "min_samples_split", where, p.min_samples_split);
      break;
    }
    case ClassifierKind::nb: {
      check_keys(j, where, {"kind", "var_smoothing"});
      auto& p = std::get<NaiveBayesParams>(spec.params);
      p.var_smoothing = value_of<double>(j, "var_smoothing", where, p.var_smoothing);
      break;
    }
  }
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + where + "': " + e.what());
  }
  return spec;
}

Json read_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(std::string("cannot open ") + what + " '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(what) + " '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

PipelineConfig config_from_json(const Json& doc) {
  check_keys(doc, "", {"classifiers", "cv_k", "selection_metric", "seed", "split"});
  PipelineConfig cfg;
  if (doc.contains("classifiers")) {
    const auto& list = doc.at("classifiers");
    if (!list.is_array()) {
      throw ConfigError("config key 'classifiers' must be an array");
    }
    cfg.classifiers.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.classifiers.push_back(spec_from_json(list[i], "classifiers[" + std::to_string(i) + "]"));
    }
  }
  cfg.cv_k = value_of<std::size_t>(doc, "cv_k", "", cfg.cv_k);
  if (doc.contains("selection_metric")) {
    cfg.selection_metric =
        parse_selection_metric(value_of<std::string>(doc, "selection_metric", "", "accuracy"));
  }
  cfg.seed = value_of<std::uint64_t>(doc, "seed", "", cfg.seed);
  if (doc.contains("split")) {
    const auto& s = doc.at("split");
    check_keys(s, "split", {"private_fraction", "public_fraction", "test_fraction"});
    cfg.split.private_fraction = value_of<double>(s, "private_fraction", "split", cfg.split.private_fraction);
    cfg.split.public_fraction = value_of<double>(s, "public_fraction", "split", cfg.split.public_fraction);
    cfg.split.test_fraction = value_of<double>(s, "test_fraction", "split", cfg.split.test_fraction);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path, "config file"));
}

CsvSchema schema_from_json(const Json& doc) {
  check_keys(doc, "", {"label_column", "positive_class", "missing_token", "has_header",
                       "column_names", "drop_columns", "class_names"});
  CsvSchema s;
  s.label_column = value_of<std::string>(doc, "label_column", "", s.label_column);
  if (doc.contains("positive_class")) {
    s.positive_class = value_of<std::string>(doc, "positive_class", "", "");
  }
  s.missing_token = value_of<std::string>(doc, "missing_token", "", s.missing_token);
  s.has_header = value_of<bool>(doc, "has_header", "", s.has_header);
  s.column_names = value_of<std::vector<std::string>>(doc, "column_names", "", {});
  s.drop_columns = value_of<std::vector<std::string>>(doc, "drop_columns", "", {});
  s.class_names = value_of<std::vector<std::string>>(doc, "class_names", "", {});
  return s;
}

CsvSchema load_schema(const std::filesystem::path& path) {
  return schema_from_json(read_json_file(path, "schema file"));
}

}  // namespace mimic
