#include "mimic/model_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "mimic/error.hpp"

namespace mimic {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormatName = "mimiclearn-model";

void guard_shareable(const TrainedModel& m) {
  if (m.origin() != Origin::student_shareable) {
    throw PrivacyError(
        "refusing to export a teacher-private model: teachers are trained on private records and "
        "must stay with the data owner; export a student instead");
  }
  if (m.kind() == ClassifierKind::knn) {
    throw PrivacyError(
        "refusing to export a knn model: its parameters are its training rows; share a "
        "parameterized student (svm, rf or nb) instead");
  }
}

Json hyperparameters_to_json(const Hyperparameters& h) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SvmParams>) {
          return {{"lambda", p.lambda}, {"epochs", p.epochs}};
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          return {{"k", p.k}};
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          return {{"trees", p.trees}, {"max_depth", p.max_depth},
                  {"min_samples_split", p.min_samples_split}};
        } else {
          return {{"var_smoothing", p.var_smoothing}};
        }
      },
      h);
}

Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Json parameters_to_json(const ModelParameters& params) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearSvmModel>) {
          Json units = Json::array();
          for (const auto& u : p.units) {
            units.push_back({{"weights", u.weights}, {"bias", u.bias}});
          }
          return {{"units", std::move(units)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          Json trees = Json::array();
          for (const auto& tree : p.trees) {
            Json nodes = Json::array();
            for (const auto& node : tree.nodes) {
              if (node.is_leaf()) {
                nodes.push_back({{"class_counts", node.class_counts}});
              } else {
                nodes.push_back({{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right},
                                 {"class_counts", node.class_counts}});
              }
            }
            trees.push_back({{"nodes", std::move(nodes)}});
          }
          return {{"trees", std::move(trees)}};
        } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
          return {{"priors", p.priors},
                  {"means", matrix_rows(p.means)},
                  {"variances", matrix_rows(p.variances)},
                  {"epsilon", p.epsilon}};
        } else {
          // Unreachable: guard_shareable rejects knn before serialization.
          throw PrivacyError("knn parameters are never serialized");
        }
      },
      params);
}

// -- parsing helpers ---------------------------------------------------------

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) {
    throw FormatError(where + " must be an object");
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw FormatError("missing field '" + where + "." + key + "'");
  }
  return *it;
}

template <class T>
T get_as(const Json& v, const std::string& name) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError("field '" + name + "' has the wrong type");
  }
}

template <class T>
T field(const Json& obj, const char* key, const std::string& where) {
  return get_as<T>(require(obj, key, where), where + "." + key);
}

template <class T>
T field_or(const Json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) {
    return fallback;
  }
  return get_as<T>(obj.at(key), where + "." + key);
}

Matrix matrix_from_rows(const Json& rows, const std::string& name) {
  const auto vv = get_as<std::vector<std::vector<double>>>(rows, name);
  const std::size_t cols = vv.empty() ? 0 : vv.front().size();
  std::vector<double> flat;
  for (const auto& r : vv) {
    if (r.size() != cols) {
      throw FormatError("field '" + name + "' is ragged");
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Matrix(vv.size(), cols, std::move(flat));
}

Hyperparameters hyperparameters_from_json(ClassifierKind kind, const Json& h) {
  const std::string w = "hyperparameters";
  switch (kind) {
    case ClassifierKind::svm:
      return SvmParams{field_or<double>(h, "lambda", w, SvmParams{}.lambda),
                       field_or<std::size_t>(h, "epochs", w, SvmParams{}.epochs)};
    case ClassifierKind::knn:
      return KnnParams{field_or<std::size_t>(h, "k", w, KnnParams{}.k)};
    case ClassifierKind::rf:
      return ForestParams{field_or<std::size_t>(h, "trees", w, ForestParams{}.trees),
                          field_or<std::size_t>(h, "max_depth", w, ForestParams{}.max_depth),
                          field_or<std::size_t>(h, "min_samples_split", w,
                                                ForestParams{}.min_samples_split)};
    case ClassifierKind::nb:
      return NaiveBayesParams{
          field_or<double>(h, "var_smoothing", w, NaiveBayesParams{}.var_smoothing)};
  }
  throw FormatError("unknown classifier kind");
}

ModelParameters parameters_from_json(ClassifierKind kind, const Json& p) {
  const std::string w = "parameters";
  switch (kind) {
    case ClassifierKind::svm: {
      LinearSvmModel m;
      for (const auto& u : get_as<Json>(require(p, "units", w), "parameters.units")) {
        m.units.push_back({field<std::vector<double>>(u, "weights", "parameters.units[]"),
                           field<double>(u, "bias", "parameters.units[]")});
      }
      return m;
    }
    case ClassifierKind::rf: {
      ForestModel m;
      const auto& trees = require(p, "trees", w);
      if (!trees.is_array()) {
        throw FormatError("field 'parameters.trees' must be an array");
      }
      for (const auto& t : trees) {
        DecisionTree tree;
        const auto& nodes = require(t, "nodes", "parameters.trees[]");
        if (!nodes.is_array()) {
          throw FormatError("field 'parameters.trees[].nodes' must be an array");
        }
        for (const auto& n : nodes) {
          const std::string nw = "parameters.trees[].nodes[]";
          TreeNode node;
          for (const auto c : field<std::vector<std::int64_t>>(n, "class_counts", nw)) {
            if (c < 0 || c > std::numeric_limits<std::uint32_t>::max()) {
              throw FormatError("tree leaf class count " + std::to_string(c) + " out of range");
            }
            node.class_counts.push_back(static_cast<std::uint32_t>(c));
          }
          node.feature = field_or<std::int32_t>(n, "feature", nw, TreeNode::kLeaf);
          if (!node.is_leaf()) {
            node.threshold = field<double>(n, "threshold", nw);
            node.left = field<std::int32_t>(n, "left", nw);
            node.right = field<std::int32_t>(n, "right", nw);
          }
          tree.nodes.push_back(std::move(node));
        }
        m.trees.push_back(std::move(tree));
      }
      return m;
    }
    case ClassifierKind::nb: {
      GaussianNbModel m;
      m.priors = field<std::vector<double>>(p, "priors", w);
      m.means = matrix_from_rows(require(p, "means", w), "parameters.means");
      m.variances = matrix_from_rows(require(p, "variances", w), "parameters.variances");
      m.epsilon = field<double>(p, "epsilon", w);
      return m;
    }
    case ClassifierKind::knn:
      break;
  }
  throw FormatError("knn models are not accepted: they embed their training rows");
}

}  // namespace

Json model_to_json(const TrainedModel& m, const ModelMetadata& meta) {
  guard_shareable(m);
  Json doc;
  doc["format"] = kFormatName;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = std::string(to_string(m.kind()));
  doc["origin"] = std::string(to_string(m.origin()));
  doc["seed"] = m.spec().seed;
  doc["hyperparameters"] = hyperparameters_to_json(m.spec().params);
  doc["feature_count"] = m.feature_count();
  doc["class_names"] = m.class_names();
  if (m.scaler()) {
    doc["scaler"] = {{"means", m.scaler()->means}, {"std_devs", m.scaler()->std_devs}};
  } else {
    doc["scaler"] = nullptr;
  }
  doc["parameters"] = parameters_to_json(m.parameters());
  Json md;
  if (meta.created_at) {
    md["created_at"] = *meta.created_at;
  }
  md["source_id"] = meta.source_id;
  md["selection_metric"] = meta.selection_metric;
  md["selection_metric_value"] = meta.selection_metric_value;
  doc["metadata"] = std::move(md);
  return doc;
}

std::string serialize_model(const TrainedModel& m, const ModelMetadata& meta) {
  return model_to_json(m, meta).dump(2) + "\n";
}

TrainedModel model_from_json(const Json& doc, ModelMetadata* meta) {
  if (!doc.is_object()) {
    throw FormatError("model file must contain a JSON object");
  }
  if (doc.contains("format") && doc.at("format") != kFormatName) {
    throw FormatError("not a mimiclearn model file");
  }
  const int version = field<int>(doc, "format_version", "model");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format_version " + std::to_string(version) +
                      " (supported: " + std::to_string(kModelFormatVersion) + ")");
  }
  const auto origin = field<std::string>(doc, "origin", "model");
  if (origin != to_string(Origin::student_shareable)) {
    throw FormatError("model origin '" + origin + "' is not student-shareable");
  }
  ClassifierKind kind;
  try {
    kind = parse_classifier_kind(field<std::string>(doc, "kind", "model"));
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  if (kind == ClassifierKind::knn) {
    throw FormatError("knn models are not accepted: they embed their training rows");
  }
  const Json empty = Json::object();
  ClassifierSpec spec{
      hyperparameters_from_json(kind, doc.contains("hyperparameters") ? doc.at("hyperparameters") : empty),
      field_or<std::uint64_t>(doc, "seed", "model", 0)};

  std::optional<ScalerParams> scaler;
  if (doc.contains("scaler") && !doc.at("scaler").is_null()) {
    const auto& s = doc.at("scaler");
    scaler = ScalerParams{field<std::vector<double>>(s, "means", "scaler"),
                          field<std::vector<double>>(s, "std_devs", "scaler")};
  }

  if (meta != nullptr) {
    const auto& md = doc.contains("metadata") ? doc.at("metadata") : empty;
    meta->created_at.reset();
    if (md.contains("created_at")) {
      meta->created_at = field<std::string>(md, "created_at", "metadata");
    }
    meta->source_id = field_or<std::string>(md, "source_id", "metadata", "");
    meta->selection_metric = field_or<std::string>(md, "selection_metric", "metadata", "");
    meta->selection_metric_value = field_or<double>(md, "selection_metric_value", "metadata", 0.0);
  }

  try {
    return TrainedModel(std::move(spec), parameters_from_json(kind, require(doc, "parameters", "model")),
                        field<std::vector<std::string>>(doc, "class_names", "model"),
                        field<std::size_t>(doc, "feature_count", "model"), std::move(scaler),
                        Origin::student_shareable);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("model rejected: ") + e.what());
  }
}

void export_model(const TrainedModel& m, const std::filesystem::path& path,
                  const ModelMetadata& meta) {
  const std::string bytes = serialize_model(m, meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write model file '" + path.string() + "'");
  }
  out << bytes;
  if (!out.flush()) {
    throw Error("failed writing model file '" + path.string() + "'");
  }
}

ImportedModel import_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open model file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("model file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  ModelMetadata meta;
  TrainedModel model = model_from_json(doc, &meta);
  return {std::move(model), std::move(meta)};
}

}  // namespace mimic
