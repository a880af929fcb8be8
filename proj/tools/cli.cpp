#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "mimic/error.hpp"
#include "mimic/model_io.hpp"
#include "mimic/parallel.hpp"
#include "mimic/pipeline.hpp"
#include "mimic/report.hpp"

#ifndef MIMIC_VERSION
#define MIMIC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace mimic::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

namespace {

struct SchemaFlags {
  std::optional<std::string> schema_path;
  std::optional<std::string> label_column;
  std::optional<std::string> positive_class;
  std::optional<std::string> missing_token;
  std::optional<std::string> drop_columns;
  std::optional<std::string> column_names;
  bool no_header = false;
};

void add_schema_flags(CLI::App& cmd, SchemaFlags& f) {
  cmd.add_option("--schema", f.schema_path, "JSON schema file");
  cmd.add_option("--label-column", f.label_column, "Label column name");
  cmd.add_option("--positive-class", f.positive_class, "Label value mapped to the positive class");
  cmd.add_option("--missing-token", f.missing_token, "Cell text treated as missing (default '?')");
  cmd.add_option("--drop-columns", f.drop_columns, "Comma-separated columns to ignore");
  cmd.add_option("--column-names", f.column_names, "Comma-separated names for header-less files");
  cmd.add_flag("--no-header", f.no_header, "The file has no header row");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

CsvSchema build_schema(const SchemaFlags& f) {
  CsvSchema s = f.schema_path ? load_schema(*f.schema_path) : CsvSchema{};
  if (f.label_column) {
    s.label_column = *f.label_column;
  }
  if (f.positive_class) {
    s.positive_class = *f.positive_class;
  }
  if (f.missing_token) {
    s.missing_token = *f.missing_token;
  }
  if (f.drop_columns) {
    s.drop_columns = split_list(*f.drop_columns);
  }
  if (f.column_names) {
    s.column_names = split_list(*f.column_names);
  }
  if (f.no_header) {
    s.has_header = false;
  }
  return s;
}

Json schema_to_json(const CsvSchema& s) {
  Json j;
  j["label_column"] = s.label_column;
  j["positive_class"] = s.positive_class ? Json(*s.positive_class) : Json(nullptr);
  j["missing_token"] = s.missing_token;
  j["has_header"] = s.has_header;
  j["column_names"] = s.column_names;
  j["drop_columns"] = s.drop_columns;
  j["class_names"] = s.class_names;
  return j;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot read '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Files produced by a command, written only after everything succeeded.
class Outputs {
 public:
  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }

  Json listing() const {
    Json list = Json::array();
    for (const auto& [name, content] : files_) {
      list.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }
    return list;
  }

  void commit(const fs::path& dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    for (const auto& [name, content] : files_) {
      const fs::path target = dir / name;
      const fs::path tmp = dir / (name + ".partial");
      {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out) {
          throw DataError("cannot write '" + tmp.string() + "'");
        }
      }
      fs::rename(tmp, target);
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

fs::path resolve_out_dir(const std::optional<std::string>& flag) {
  if (flag) {
    return *flag;
  }
  if (const char* env = std::getenv("MIMIC_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  throw ConfigError("no output directory: pass --out-dir or set MIMIC_OUT_DIR");
}

SplitSpec parse_fractions(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 3) {
    throw ConfigError("--fractions expects three comma-separated values");
  }
  SplitSpec s;
  try {
    s.private_fraction = std::stod(parts[0]);
    s.public_fraction = std::stod(parts[1]);
    s.test_fraction = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("--fractions has a non-numeric value");
  }
  return s;
}

Json input_entry(const std::string& path, const std::string& bytes) {
  return {{"path", path}, {"sha256", sha256_hex(bytes)}};
}

Json manifest_head(std::string_view command, std::uint64_t seed) {
  Json m;
  m["tool"] = "mimic";
  m["version"] = MIMIC_VERSION;
  m["model_format_version"] = kModelFormatVersion;
  m["command"] = std::string(command);
  m["seed"] = seed;
  return m;
}

std::string label_column_name(const CsvSchema& s) {
  return s.label_column.empty() ? std::string("label") : s.label_column;
}

std::string classifier_table(const PipelineRun& run) {
  std::string out =
      "classifier,teacher_precision,teacher_recall,teacher_f1,teacher_accuracy,"
      "student_precision,student_recall,student_f1,student_accuracy\n";
  for (std::size_t i = 0; i < run.teacher.reports.size(); ++i) {
    const CvReport& t = run.teacher.reports[i];
    const CvReport& s = run.student.reports[i];
    out += std::string(to_string(t.spec.kind()));
    for (const CvReport* r : {&t, &s}) {
      out += ',' + fixed4(r->mean_precision) + ',' + fixed4(r->mean_recall) + ',' +
             fixed4(r->mean_f1) + ',' + fixed4(r->mean_accuracy);
    }
    out += '\n';
  }
  return out;
}

std::string fidelity_table(const FidelityReport& f) {
  const MetricsReport& t = f.teacher_metrics;
  const MetricsReport& s = f.student_metrics;
  std::string out = "metric,teacher,student,delta\n";
  auto row = [&out](const char* name, double a, double b, double d) {
    out += std::string(name) + ',' + fixed4(a) + ',' + fixed4(b) + ',' + fixed4(d) + '\n';
  };
  row("accuracy", t.accuracy, s.accuracy, f.deltas.accuracy);
  row("precision", t.macro.precision, s.macro.precision, f.deltas.precision);
  row("recall", t.macro.recall, s.macro.recall, f.deltas.recall);
  row("f1", t.macro.f1, s.macro.f1, f.deltas.f1);
  row("auc", f.teacher_roc.auc, f.student_roc.auc, f.deltas.auc);
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct Common {
  std::optional<std::string> data;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  SchemaFlags schema;
};

std::string require(const std::optional<std::string>& v, const char* flag) {
  if (!v) {
    throw ConfigError(std::string(flag) + " is required");
  }
  return *v;
}

int cmd_split(const Common& c, const std::optional<std::string>& fractions) {
  const std::string data_path = require(c.data, "--data");
  const CsvSchema schema = build_schema(c.schema);
  const fs::path out_dir = resolve_out_dir(c.out_dir);
  const std::string bytes = read_file(data_path);
  const Dataset d = parse_csv(bytes, schema, fs::path(data_path).filename().string()).dataset;

  SplitSpec spec = fractions ? parse_fractions(*fractions) : SplitSpec{};
  spec.seed = c.seed.value_or(0);
  const SplitResult split = stratified_split(d, spec);
  const std::string label = label_column_name(schema);

  Outputs outputs;
  outputs.add("private.csv", to_csv(split.private_set, label));
  outputs.add("public_unlabeled.csv", to_csv(split.public_pool, label));
  outputs.add("test.csv", to_csv(split.test, label));

  Json m = manifest_head("split", spec.seed);
  m["fractions"] = {spec.private_fraction, spec.public_fraction, spec.test_fraction};
  m["schema"] = schema_to_json(schema);
  m["inputs"] = Json::array({input_entry(data_path, bytes)});
  m["rows"] = {{"private", split.private_set.row_ids},
               {"public", split.public_pool.row_ids},
               {"test", split.test.row_ids}};
  m["outputs"] = outputs.listing();
  outputs.add("split_manifest.json", dump(m));
  outputs.commit(out_dir);
  return ok;
}

int cmd_run(const Common& c, const std::optional<std::string>& config_path,
            const std::optional<std::string>& fractions, const std::optional<std::size_t>& cv_k,
            bool timings) {
  const std::string data_path = require(c.data, "--data");
  const CsvSchema schema = build_schema(c.schema);
  const fs::path out_dir = resolve_out_dir(c.out_dir);

  std::string config_bytes;
  PipelineConfig cfg;
  if (config_path) {
    config_bytes = read_file(*config_path);
    Json doc;
    try {
      doc = Json::parse(config_bytes);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config file '" + *config_path + "' is not valid JSON: " + e.what());
    }
    cfg = config_from_json(doc);
  }
  if (c.seed) {
    cfg.seed = *c.seed;
  }
  if (fractions) {
    const SplitSpec s = parse_fractions(*fractions);
    cfg.split.private_fraction = s.private_fraction;
    cfg.split.public_fraction = s.public_fraction;
    cfg.split.test_fraction = s.test_fraction;
  }
  if (cv_k) {
    cfg.cv_k = *cv_k;
  }
  cfg.split.seed = cfg.seed;
  cfg.validate();

  const std::string bytes = read_file(data_path);
  const Dataset d = parse_csv(bytes, schema, fs::path(data_path).filename().string()).dataset;
  const PipelineRun run = run_pipeline(d, cfg);

  Outputs outputs;
  outputs.add("run.json", dump(to_json(run, timings)));
  outputs.add("classifier_table.csv", classifier_table(run));
  outputs.add("fidelity_table.csv", fidelity_table(run.fidelity));
  outputs.add("roc_teacher.csv", roc_to_csv(run.fidelity.teacher_roc));
  outputs.add("roc_student.csv", roc_to_csv(run.fidelity.student_roc));
  if (run.shared_student) {
    ModelMetadata meta;
    meta.source_id = run.source_id;
    meta.selection_metric = std::string(to_string(cfg.selection_metric));
    meta.selection_metric_value =
        run.student.reports[*run.shared_student_index].selection_value(cfg.selection_metric);
    outputs.add("student_model.json", serialize_model(*run.shared_student, meta));
  }

  Json m = manifest_head("run", cfg.seed);
  m["config"] = to_json(cfg);
  m["schema"] = schema_to_json(schema);
  Json inputs = Json::array({input_entry(data_path, bytes)});
  if (config_path) {
    inputs.push_back(input_entry(*config_path, config_bytes));
  }
  m["inputs"] = std::move(inputs);
  m["outputs"] = outputs.listing();
  m["warnings"] = run.warnings;
  outputs.add("manifest.json", dump(m));
  outputs.commit(out_dir);
  return ok;
}

int cmd_evaluate(const Common& c, const std::string& model_path, std::ostream& out) {
  const std::string data_path = require(c.data, "--data");
  CsvSchema schema = build_schema(c.schema);
  const ImportedModel imported = import_model(model_path);
  const TrainedModel& model = imported.model;
  if (schema.label_column.empty()) {
    throw ConfigError("evaluate needs labeled data: pass --label-column or a schema with one");
  }
  if (model.class_count() == 2 && !schema.positive_class) {
    schema.positive_class = model.class_names()[1];
  }
  const std::string bytes = read_file(data_path);
  const Dataset d = parse_csv(bytes, schema, fs::path(data_path).filename().string()).dataset;
  if (d.size() == 0) {
    throw DataError(d.source_id + ": no data rows");
  }
  if (d.feature_count() != model.feature_count()) {
    throw DataError("feature count mismatch: model expects " + std::to_string(model.feature_count()) +
                    ", data has " + std::to_string(d.feature_count()));
  }
  std::vector<Label> y;
  y.reserve(d.size());
  for (const Label l : d.label_values()) {
    const std::string& name = d.class_names[static_cast<std::size_t>(l)];
    const auto& known = model.class_names();
    const auto it = std::find(known.begin(), known.end(), name);
    if (it == known.end()) {
      throw DataError("label '" + name + "' is not a class of the model");
    }
    y.push_back(static_cast<Label>(it - known.begin()));
  }
  const std::vector<Label> predicted = model.predict_batch(d.features);
  const MetricsReport report = macro_metrics(y, predicted, model.class_count());

  Json j;
  j["model"] = {{"path", model_path},
                {"sha256", sha256_hex(read_file(model_path))},
                {"kind", std::string(to_string(model.kind()))},
                {"class_names", model.class_names()}};
  j["data"] = input_entry(data_path, bytes);
  j["metrics"] = to_json(report);
  const bool both = std::find(y.begin(), y.end(), 0) != y.end() &&
                    std::find(y.begin(), y.end(), 1) != y.end();
  if (model.class_count() == 2 && both) {
    j["auc"] = roc(model.score_batch(d.features), y).auc;
  } else {
    j["auc"] = nullptr;
  }

  if (c.out_dir) {
    Outputs outputs;
    outputs.add("metrics.json", dump(j));
    outputs.commit(*c.out_dir);
  } else {
    out << dump(j);
  }
  return ok;
}

int cmd_synthesize(const Common& c, std::size_t rows, const std::string& name) {
  const fs::path out_dir = resolve_out_dir(c.out_dir);
  const Dataset d = make_synthetic_cardiovascular(rows, c.seed.value_or(0));
  Outputs outputs;
  outputs.add(name, to_csv(d, "cardio"));
  outputs.commit(out_dir);
  return ok;
}

void add_common(CLI::App& cmd, Common& c, bool with_data) {
  if (with_data) {
    cmd.add_option("--data", c.data, "Input CSV file");
    add_schema_flags(cmd, c.schema);
  }
  cmd.add_option("--out-dir", c.out_dir, "Output directory (default: $MIMIC_OUT_DIR)");
  cmd.add_option("--seed", c.seed, "Run seed");
  cmd.add_option("--threads", c.threads, "Worker threads (default: $MIMIC_THREADS or all cores)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mimic: private teacher, shareable student"};
  app.set_version_flag("--version", MIMIC_VERSION);
  app.require_subcommand(1);

  Common split_c;
  std::optional<std::string> split_fractions;
  auto* split = app.add_subcommand("split", "Stratified private/public/test split");
  add_common(*split, split_c, true);
  split->add_option("--fractions", split_fractions, "private,public,test fractions");

  Common run_c;
  std::optional<std::string> run_config;
  std::optional<std::string> run_fractions;
  std::optional<std::size_t> run_cv_k;
  bool run_timings = false;
  auto* run_cmd = app.add_subcommand("run", "Teacher race, annotation, student race, fidelity");
  add_common(*run_cmd, run_c, true);
  run_cmd->add_option("--config", run_config, "Pipeline config JSON");
  run_cmd->add_option("--fractions", run_fractions, "private,public,test fractions");
  run_cmd->add_option("--cv-k", run_cv_k, "Cross-validation folds");
  run_cmd->add_flag("--timings", run_timings, "Include stage timings in run.json");

  Common eval_c;
  std::string eval_model;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics of a shared model on labeled data");
  add_common(*evaluate, eval_c, true);
  evaluate->add_option("--model", eval_model, "Exported model file")->required();

  Common synth_c;
  std::size_t synth_rows = 6000;
  std::string synth_name = "synthetic-cardiovascular.csv";
  auto* synth = app.add_subcommand("synthesize", "Write the synthetic cardiovascular dataset");
  add_common(*synth, synth_c, false);
  synth->add_option("--rows", synth_rows, "Row count")->capture_default_str();
  synth->add_option("--name", synth_name, "Output file name")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage;
  }

  auto apply_threads = [](const Common& c) {
    if (c.threads) {
      set_thread_count(*c.threads);
    }
  };

  try {
    if (split->parsed()) {
      apply_threads(split_c);
      return cmd_split(split_c, split_fractions);
    }
    if (run_cmd->parsed()) {
      apply_threads(run_c);
      return cmd_run(run_c, run_config, run_fractions, run_cv_k, run_timings);
    }
    if (evaluate->parsed()) {
      apply_threads(eval_c);
      return cmd_evaluate(eval_c, eval_model, out);
    }
    apply_threads(synth_c);
    return cmd_synthesize(synth_c, synth_rows, synth_name);
  } catch (const ConfigError& e) {
    err << "mimic: " << e.what() << "\n";
    return usage;
  } catch (const DataError& e) {
    err << "mimic: " << e.what() << "\n";
    return data;
  } catch (const FormatError& e) {
    err << "mimic: " << e.what() << "\n";
    return data;
  } catch (const std::exception& e) {
    err << "mimic: " << e.what() << "\n";
    return pipeline;
  }
}

}  // namespace mimic::cli
