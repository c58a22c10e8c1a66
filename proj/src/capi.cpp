#include "remind.h"

#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "remind/data.hpp"
#include "remind/error.hpp"
#include "remind/experiment.hpp"
#include "remind/model.hpp"
#include "remind/rng.hpp"
#include "remind/train.hpp"

using nlohmann::json;

struct remind_model {
  remind::model::ModelDims dims;
  remind::model::ParamSet params;
};

struct remind_dataset {
  remind::data::Dataset ds;
};

namespace {

thread_local std::string g_last_error;

remind_status status_of(remind::ErrorCode code) {
  using remind::ErrorCode;
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::Parameter:
    case ErrorCode::Stratification:
      return REMIND_E_USAGE;
    case ErrorCode::Io:
      return REMIND_E_IO;
    case ErrorCode::Data:
      return REMIND_E_DATA;
    case ErrorCode::Numeric:
    case ErrorCode::Convergence:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::DegenerateMap:
    case ErrorCode::DegenerateChannel:
      return REMIND_E_NUMERIC;
    default:
      return REMIND_E_INTERNAL;
  }
}

template <typename Fn>
remind_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return REMIND_OK;
  } catch (const remind::Error& e) {
    g_last_error = std::string(remind::error_code_name(e.code())) + ": " + e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("config: ") + e.what();
    return REMIND_E_USAGE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return REMIND_E_INTERNAL;
  }
}

json parse_config(const char* config_json) {
  if (!config_json) remind::fail(remind::ErrorCode::Usage, "null config");
  try {
    return json::parse(config_json);
  } catch (const json::exception& e) {
    remind::fail(remind::ErrorCode::Usage, std::string("config is not valid JSON: ") + e.what());
  }
}

remind_status run_command(const char* config_json, const char* command) {
  return guarded([&]() {
    json resolved = remind::experiment::resolve_config(parse_config(config_json), command);
    if (std::strcmp(command, "generate") == 0)
      remind::experiment::cmd_generate(resolved);
    else if (std::strcmp(command, "pretrain") == 0)
      remind::experiment::cmd_pretrain(resolved);
    else if (std::strcmp(command, "finetune") == 0)
      remind::experiment::cmd_finetune(resolved);
    else if (std::strcmp(command, "eval") == 0)
      remind::experiment::cmd_eval(resolved);
    else if (std::strcmp(command, "xval") == 0)
      remind::experiment::cmd_xval(resolved);
    else
      remind::experiment::cmd_corrupt(resolved);
  });
}

}  // namespace

extern "C" {

const char* remind_version(void) { return "0.1.0"; }

const char* remind_last_error(void) { return g_last_error.c_str(); }

remind_status remind_generate(const char* config_json) { return run_command(config_json, "generate"); }
remind_status remind_pretrain(const char* config_json) { return run_command(config_json, "pretrain"); }
remind_status remind_finetune(const char* config_json) { return run_command(config_json, "finetune"); }
remind_status remind_eval(const char* config_json) { return run_command(config_json, "eval"); }
remind_status remind_xval(const char* config_json) { return run_command(config_json, "xval"); }
remind_status remind_corrupt(const char* config_json) { return run_command(config_json, "corrupt"); }

remind_status remind_report_render(const char* metrics_json_path, char** text_out) {
  return guarded([&]() {
    if (!metrics_json_path || !text_out) remind::fail(remind::ErrorCode::Usage, "null argument");
    std::ifstream in(metrics_json_path);
    if (!in) remind::fail(remind::ErrorCode::Io, std::string("cannot open ") + metrics_json_path);
    json metrics;
    try {
      in >> metrics;
    } catch (const json::exception& e) {
      remind::fail(remind::ErrorCode::Data, std::string("bad metrics JSON: ") + e.what());
    }
    std::string text = remind::experiment::render_report(metrics);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *text_out = buf;
  });
}

void remind_string_free(char* text) { delete[] text; }

remind_status remind_dataset_open(const char* manifest_path, remind_dataset** out) {
  return guarded([&]() {
    if (!manifest_path || !out) remind::fail(remind::ErrorCode::Usage, "null argument");
    *out = new remind_dataset{remind::data::Dataset::open(manifest_path)};
  });
}

void remind_dataset_close(remind_dataset* dataset) { delete dataset; }

int64_t remind_dataset_size(const remind_dataset* dataset) {
  return dataset ? static_cast<int64_t>(dataset->ds.size()) : 0;
}

remind_status remind_model_create(const char* config_json, remind_model** out) {
  return guarded([&]() {
    if (!out) remind::fail(remind::ErrorCode::Usage, "null output handle");
    json cfg = parse_config(config_json);
    if (!cfg.contains("seed")) remind::fail(remind::ErrorCode::Usage, "model creation needs a seed");
    json shaped{{"model", cfg.value("model", json::object())}};
    json resolved{{"model", remind::experiment::merged_model_section(shaped)}};
    remind::model::ModelDims dims = remind::experiment::dims_from_config(resolved);
    remind::model::ParamSet params = remind::model::init_params(
        dims, remind::derive_seed(cfg.at("seed").get<std::uint64_t>(), "init"));
    *out = new remind_model{dims, std::move(params)};
  });
}

remind_status remind_model_load(const char* checkpoint_path, remind_model** out) {
  return guarded([&]() {
    if (!checkpoint_path || !out) remind::fail(remind::ErrorCode::Usage, "null argument");
    remind::model::Checkpoint cp = remind::model::load_checkpoint(checkpoint_path);
    *out = new remind_model{cp.dims, std::move(cp.params)};
  });
}

remind_status remind_model_save(const remind_model* model, const char* checkpoint_path) {
  return guarded([&]() {
    if (!model || !checkpoint_path) remind::fail(remind::ErrorCode::Usage, "null argument");
    remind::model::save_checkpoint(checkpoint_path, model->dims, model->params);
  });
}

void remind_model_close(remind_model* model) { delete model; }

remind_status remind_model_dims(const remind_model* model, uint32_t* channels, uint32_t* samples,
                                uint32_t* segments, uint32_t* classes) {
  return guarded([&]() {
    if (!model) remind::fail(remind::ErrorCode::Usage, "null model");
    if (channels) *channels = static_cast<uint32_t>(model->dims.channels);
    if (samples) *samples = static_cast<uint32_t>(model->dims.samples);
    if (segments) *segments = static_cast<uint32_t>(model->dims.segments);
    if (classes) *classes = static_cast<uint32_t>(model->dims.classes);
  });
}

remind_status remind_model_classify(const remind_model* model, const remind_dataset* dataset,
                                    int64_t index, const char* layout_path, double jitter,
                                    double* probs_out, int64_t probs_len) {
  return guarded([&]() {
    if (!model || !dataset || !layout_path || !probs_out)
      remind::fail(remind::ErrorCode::Usage, "null argument");
    if (index < 0 || index >= static_cast<int64_t>(dataset->ds.size()))
      remind::fail(remind::ErrorCode::Usage, "dataset index out of range");
    if (probs_len != model->dims.classes)
      remind::fail(remind::ErrorCode::Usage, "probability buffer length must equal the class count");
    remind::frontend::ElectrodeLayout layout = remind::frontend::load_layout(layout_path);
    remind::Vec probs = remind::train::classify(model->params, model->dims, layout,
                                                dataset->ds.signal(static_cast<std::size_t>(index)),
                                                jitter, 0);
    for (int64_t i = 0; i < probs_len; ++i) probs_out[i] = probs(static_cast<Eigen::Index>(i));
  });
}

}  // extern "C"
