#pragma once

// JSON documents: the "jdan-v1" model file, the training config, and the
// training checkpoint.

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "jdan/data.hpp"
#include "jdan/forecaster.hpp"
#include "jdan/training.hpp"

namespace jdan {

inline constexpr const char* kModelVersion = "jdan-v1";

nlohmann::json to_json(const Bounds& b);
nlohmann::json to_json(const JdanModel& model);
nlohmann::json to_json(const ArchitectureDescriptor& arch);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const CsvSpec& spec);

JdanModel model_from_json(const nlohmann::json& doc);
ArchitectureDescriptor arch_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
CsvSpec csv_spec_from_json(const nlohmann::json& j);

//! A model file: the joint model (or conditioning net) plus the column layout
//! it was trained on, when known.
struct ModelDocument {
    Forecaster forecaster;
    std::optional<CsvSpec> data_spec;
};

//! For a conditional forecaster the "marginals"/"correlations" sections hold the
//! model at standardized features x = 0 and the net sits under "conditioning".
nlohmann::json to_json(const Forecaster& f, const std::optional<CsvSpec>& spec = std::nullopt);
ModelDocument document_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

ModelDocument load_model(const std::filesystem::path& path);

//! Checkpoint: model document + Adam state + epoch.
nlohmann::json checkpoint_json(const TrainResult& result, const std::optional<CsvSpec>& spec);

} // namespace jdan
