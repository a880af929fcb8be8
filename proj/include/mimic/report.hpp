#pragma once

#include <string>

#include <json.hpp>

#include "mimic/data.hpp"
#include "mimic/metrics.hpp"
#include "mimic/pipeline.hpp"

namespace mimic {

using Json = nlohmann::ordered_json;

Json to_json(const ConfusionMatrix& c);
Json to_json(const ClassScores& s);
Json to_json(const MetricsReport& r);
/// Points are [fpr, tpr, threshold] triples; the +infinity threshold of the
/// first point is written as null.
Json to_json(const RocCurve& c);
Json to_json(const ClassifierSpec& s);
Json to_json(const CvReport& r);
Json to_json(const FidelityReport& f);
Json to_json(const PipelineConfig& cfg);
/// Model summaries only: fitted parameters never appear in a run report.
/// Timings are included only on request since they vary between runs.
Json to_json(const PipelineRun& run, bool include_timings = false);

/// Parses a pipeline config. Every key is optional; unknown keys and wrong
/// types raise ConfigError naming the key.
PipelineConfig config_from_json(const Json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

/// Schema file keys: label_column, positive_class, missing_token,
/// has_header, column_names, drop_columns, class_names.
CsvSchema schema_from_json(const Json& doc);
CsvSchema load_schema(const std::filesystem::path& path);

}  // namespace mimic
