#pragma once

#include <string>

#include <json.hpp>

#include "remind/corruption.hpp"
#include "remind/data.hpp"
#include "remind/model.hpp"
#include "remind/train.hpp"

namespace remind::experiment {

/// Fills every omitted field with its default and validates the result. The
/// returned document is what run.json records: it replays the run exactly.
nlohmann::json resolve_config(const nlohmann::json& in, const std::string& command);

/// The config's model section with defaults filled in.
nlohmann::json merged_model_section(const nlohmann::json& config);

model::ModelDims dims_from_config(const nlohmann::json& resolved);
train::TrainConfig train_from_config(const nlohmann::json& resolved, train::Stage stage);

void write_run_json(const nlohmann::json& resolved, const std::string& out_dir);

/// Scores a model on a dataset; the corruption spec (kind none for intact
/// evaluation) is applied to each test recording under a per-recording seed.
nlohmann::json evaluate(const model::ModelDims& dims, const model::ParamSet& params,
                        const data::Dataset& dataset, const frontend::ElectrodeLayout& layout,
                        const corruption::CorruptionSpec& spec, double jitter, std::uint64_t seed);

/// Commands. Each writes run.json plus its outputs under cfg["out"] and
/// returns the machine-readable result (also written as JSON where noted).
nlohmann::json cmd_generate(const nlohmann::json& resolved);
nlohmann::json cmd_pretrain(const nlohmann::json& resolved);   // checkpoint.rmnd + pretrain_loss.json
nlohmann::json cmd_finetune(const nlohmann::json& resolved);   // checkpoint.rmnd + finetune_loss.json
nlohmann::json cmd_eval(const nlohmann::json& resolved);       // metrics.json
nlohmann::json cmd_xval(const nlohmann::json& resolved);       // metrics.json + per-fold outputs
nlohmann::json cmd_corrupt(const nlohmann::json& resolved);    // corrupted dataset copy
std::string render_report(const nlohmann::json& metrics);      // human-readable table

/// Worker cap for fold-level parallelism (REMIND_THREADS, default 1).
int worker_cap();

}  // namespace remind::experiment
