#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mimic/error.hpp"
#include "mimic/model_io.hpp"
#include "mimic/parallel.hpp"
#include "mimic/pipeline.hpp"
#include "mimic/report.hpp"

namespace py = pybind11;
using namespace mimic;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) {
    throw DataError("expected a 2-d array");
  }
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Dataset from_arrays(const Array& x, std::optional<std::vector<Label>> y,
                    std::vector<std::string> class_names, std::vector<std::string> feature_names,
                    std::string source_id) {
  Dataset d;
  d.features = to_matrix(x);
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < d.feature_count(); ++j) {
      feature_names.push_back("x" + std::to_string(j));
    }
  }
  d.feature_names = std::move(feature_names);
  d.labels = std::move(y);
  if (d.labels && class_names.empty()) {
    const Label top = *std::max_element(d.labels->begin(), d.labels->end());
    for (Label c = 0; c <= top; ++c) {
      class_names.push_back(std::to_string(c));
    }
  }
  d.class_names = std::move(class_names);
  d.source_id = std::move(source_id);
  d.row_ids.resize(d.size());
  std::iota(d.row_ids.begin(), d.row_ids.end(), std::size_t{0});
  d.validate();
  return d;
}

ClassifierSpec make_spec(const std::string& kind, std::uint64_t seed, const py::dict& params) {
  Json entry = py::module_::import("json").attr("dumps")(params).cast<std::string>();
  entry = Json::parse(entry.get<std::string>());
  entry["kind"] = kind;
  PipelineConfig cfg = config_from_json(Json{{"classifiers", Json::array({entry})}});
  ClassifierSpec spec = cfg.classifiers.front();
  spec.seed = seed;
  return spec;
}

Origin parse_origin(const std::string& s) {
  if (s == "teacher-private") {
    return Origin::teacher_private;
  }
  if (s == "student-shareable") {
    return Origin::student_shareable;
  }
  throw ConfigError("unknown origin '" + s + "'");
}

struct PyRun {
  PipelineRun run;
  std::string report(bool timings) const { return to_json(run, timings).dump(); }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of mimiclearn";

  auto base = py::register_exception<Error>(m, "MimicError", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<PipelineError>(m, "PipelineError", base.ptr());
  py::register_exception<PrivacyError>(m, "PrivacyError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("features", [](const Dataset& d) { return to_array(d.features); })
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels; })
      .def_readonly("class_names", &Dataset::class_names)
      .def_readonly("feature_names", &Dataset::feature_names)
      .def_readonly("source_id", &Dataset::source_id)
      .def_readonly("row_ids", &Dataset::row_ids)
      .def("__len__", &Dataset::size)
      .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

  m.def("dataset_from_arrays", &from_arrays, py::arg("x"), py::arg("y") = py::none(),
        py::arg("class_names") = std::vector<std::string>{},
        py::arg("feature_names") = std::vector<std::string>{}, py::arg("source_id") = "arrays");

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, const std::string& label_column,
         std::optional<std::string> positive_class, const std::string& missing_token,
         bool has_header, std::vector<std::string> column_names,
         std::vector<std::string> drop_columns) {
        CsvSchema s;
        s.label_column = label_column;
        s.positive_class = std::move(positive_class);
        s.missing_token = missing_token;
        s.has_header = has_header;
        s.column_names = std::move(column_names);
        s.drop_columns = std::move(drop_columns);
        return load_csv(path, s).dataset;
      },
      py::arg("path"), py::arg("label_column") = "", py::arg("positive_class") = py::none(),
      py::arg("missing_token") = "?", py::arg("has_header") = true,
      py::arg("column_names") = std::vector<std::string>{},
      py::arg("drop_columns") = std::vector<std::string>{});

  m.def("load_csv_with_schema", [](const std::filesystem::path& path,
                                   const std::filesystem::path& schema) {
    return load_csv(path, load_schema(schema)).dataset;
  });

  m.def("make_synthetic_cardiovascular", &make_synthetic_cardiovascular, py::arg("rows"),
        py::arg("seed") = 0);

  m.def(
      "stratified_split",
      [](const Dataset& d, double private_fraction, double public_fraction, double test_fraction,
         std::uint64_t seed) {
        SplitResult r = stratified_split(d, {private_fraction, public_fraction, test_fraction, seed});
        return py::make_tuple(std::move(r.private_set), std::move(r.public_pool), std::move(r.test));
      },
      py::arg("d"), py::arg("private_fraction") = 0.5, py::arg("public_fraction") = 0.3,
      py::arg("test_fraction") = 0.2, py::arg("seed") = 0);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("kind", [](const TrainedModel& t) { return std::string(to_string(t.kind())); })
      .def_property_readonly("origin", [](const TrainedModel& t) { return std::string(to_string(t.origin())); })
      .def_property_readonly("class_names", &TrainedModel::class_names)
      .def_property_readonly("feature_count", &TrainedModel::feature_count)
      .def("predict", [](const TrainedModel& t, const Array& x) { return t.predict_batch(to_matrix(x)); })
      .def("score", [](const TrainedModel& t, const Array& x) { return t.score_batch(to_matrix(x)); })
      .def("__eq__", [](const TrainedModel& a, const TrainedModel& b) { return a == b; });

  m.def(
      "fit",
      [](const Dataset& d, const std::string& kind, std::uint64_t seed, const py::dict& params,
         const std::string& origin) {
        return fit(make_spec(kind, seed, params), d, parse_origin(origin));
      },
      py::arg("d"), py::arg("kind"), py::arg("seed") = 0, py::arg("params") = py::dict(),
      py::arg("origin") = "teacher-private");

  m.def(
      "serialize_model",
      [](const TrainedModel& t, const std::string& source_id) {
        ModelMetadata meta;
        meta.source_id = source_id;
        return serialize_model(t, meta);
      },
      py::arg("model"), py::arg("source_id") = "");
  m.def(
      "export_model",
      [](const TrainedModel& t, const std::filesystem::path& path, const std::string& source_id) {
        ModelMetadata meta;
        meta.source_id = source_id;
        export_model(t, path, meta);
      },
      py::arg("model"), py::arg("path"), py::arg("source_id") = "");
  m.def("import_model", [](const std::filesystem::path& path) { return import_model(path).model; });

  m.def(
      "metrics",
      [](const std::vector<Label>& y_true, const std::vector<Label>& y_pred, std::size_t class_count,
         Label positive) { return to_json(macro_metrics(y_true, y_pred, class_count, positive)).dump(); },
      py::arg("y_true"), py::arg("y_pred"), py::arg("class_count") = 2, py::arg("positive") = 1);
  m.def(
      "roc",
      [](const std::vector<double>& scores, const std::vector<Label>& y_true, Label positive) {
        return to_json(roc(scores, y_true, positive)).dump();
      },
      py::arg("scores"), py::arg("y_true"), py::arg("positive") = 1);

  py::class_<PyRun>(m, "PipelineRun")
      .def("report", &PyRun::report, py::arg("timings") = false)
      .def_property_readonly("teacher", [](const PyRun& r) { return r.run.teacher.model; })
      .def_property_readonly("student", [](const PyRun& r) { return r.run.student.model; })
      .def_property_readonly("shared_student", [](const PyRun& r) { return r.run.shared_student; });

  m.def(
      "run_pipeline",
      [](const Dataset& d, const std::string& config_json) {
        const PipelineConfig cfg = config_from_json(Json::parse(config_json));
        py::gil_scoped_release release;
        return PyRun{run_pipeline(d, cfg)};
      },
      py::arg("d"), py::arg("config_json") = "{}");
}
