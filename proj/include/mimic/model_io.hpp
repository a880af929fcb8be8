#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mimic/classifiers.hpp"

namespace mimic {

inline constexpr int kModelFormatVersion = 1;

struct ModelMetadata {
  /// Caller-supplied timestamp; omitted unless set so identical models
  /// export to identical bytes.
  std::optional<std::string> created_at;
  std::string source_id;
  std::string selection_metric;
  double selection_metric_value = 0.0;

  bool operator==(const ModelMetadata&) const = default;
};

/// The shareable model document. Throws PrivacyError for teacher-private
/// models and for KNN models.
nlohmann::ordered_json model_to_json(const TrainedModel& m, const ModelMetadata& meta);

/// Parses and validates a model document. Only student-shareable models of
/// exportable families are accepted.
TrainedModel model_from_json(const nlohmann::ordered_json& doc, ModelMetadata* meta = nullptr);

/// Serialized bytes of model_to_json (two-space indent, trailing newline).
std::string serialize_model(const TrainedModel& m, const ModelMetadata& meta);

/// Writes the model file. The privacy checks run before anything touches
/// the filesystem, so a refused export leaves no file behind.
void export_model(const TrainedModel& m, const std::filesystem::path& path,
                  const ModelMetadata& meta = {});

struct ImportedModel {
  TrainedModel model;
  ModelMetadata metadata;
};

ImportedModel import_model(const std::filesystem::path& path);

}  // namespace mimic
