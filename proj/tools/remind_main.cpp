// Command-line harness around the shared library. Subcommands assemble one
// JSON config document (config file first, then flag overrides) and hand it to
// the C API; all outputs land under --out.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "remind.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_code_of(remind_status status) {
  if (status == REMIND_OK) return kExitOk;
  if (status == REMIND_E_USAGE) return kExitUsage;
  return kExitRuntime;
}

int finish(remind_status status) {
  if (status != REMIND_OK) std::cerr << "error: " << remind_last_error() << "\n";
  return exit_code_of(status);
}

struct CommonFlags {
  std::string config_file;
  std::string out;
  std::string manifest;
  std::string layout;
  std::string checkpoint;
  std::string corrupt;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config file " << path << "\n";
    std::exit(kExitUsage);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    std::cerr << "error: bad config JSON: " << e.what() << "\n";
    std::exit(kExitUsage);
  }
  return j;
}

// Parses "a,b,c" into a JSON array of three numbers.
json parse_mix(const std::string& text) {
  json arr = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      arr.push_back(std::stod(item));
    } catch (const std::exception&) {
      std::cerr << "error: bad --mix value: " << text << "\n";
      std::exit(kExitUsage);
    }
  }
  if (arr.size() != 3) {
    std::cerr << "error: --mix needs three comma-separated weights\n";
    std::exit(kExitUsage);
  }
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian-manifold decoding pipeline for multichannel recordings"};
  app.require_subcommand(1);

  CommonFlags common;
  json model_over = json::object();
  json train_over = json::object();
  json generate_over = json::object();
  int folds = 0;
  std::string mix_text;
  std::string metrics_path;
  bool no_ssl = false, no_filters = false, no_gpe = false, freeze_encoder = false;

  auto add_common = [&](CLI::App* cmd, bool with_data) {
    cmd->add_option("--config", common.config_file, "JSON config file (flags override it)");
    cmd->add_option("--out", common.out, "output directory");
    cmd->add_option("--seed", common.seed, "master seed")->each([&](const std::string&) {
      common.seed_set = true;
    });
    if (with_data) {
      cmd->add_option("--manifest", common.manifest, "dataset manifest.json");
      cmd->add_option("--layout", common.layout, "electrode layout csv");
    }
  };

  auto add_model_flags = [&](CLI::App* cmd) {
    static int segments, d_enc, kernel, classes, hidden_mult;
    static double gamma, epsilon;
    static std::string nonlinearity;
    cmd->add_option("--segments", segments, "states per recording")
        ->each([&](const std::string& v) { model_over["segments"] = std::stoi(v); });
    cmd->add_option("--d-enc", d_enc, "positional encoding width per axis")
        ->each([&](const std::string& v) { model_over["d_enc"] = std::stoi(v); });
    cmd->add_option("--kernel", kernel, "temporal kernel length (odd)")
        ->each([&](const std::string& v) { model_over["kernel"] = std::stoi(v); });
    cmd->add_option("--classes", classes, "class count")
        ->each([&](const std::string& v) { model_over["classes"] = std::stoi(v); });
    cmd->add_option("--hidden-mult", hidden_mult, "reconstruction head width multiplier")
        ->each([&](const std::string& v) { model_over["hidden_mult"] = std::stoi(v); });
    cmd->add_option("--gamma", gamma, "shrinkage toward identity")
        ->each([&](const std::string& v) { model_over["gamma"] = std::stod(v); });
    cmd->add_option("--epsilon", epsilon, "eigenvalue floor")
        ->each([&](const std::string& v) { model_over["epsilon"] = std::stod(v); });
    cmd->add_option("--nonlinearity", nonlinearity, "none|tanh after the spatial mix")
        ->each([&](const std::string& v) { model_over["nonlinearity"] = v; });
    cmd->add_flag("--no-filters", no_filters, "disable the spatiotemporal filters");
    cmd->add_flag("--no-gpe", no_gpe, "disable the positional encoding");
  };

  auto add_train_flags = [&](CLI::App* cmd, bool pretrain_stage, bool finetune_stage) {
    static int pre_epochs, fin_epochs, batch;
    static double pre_lr, fin_lr, enc_mult, frac, jitter;
    static std::string domain;
    if (pretrain_stage) {
      cmd->add_option("--pretrain-epochs", pre_epochs, "stage-1 epochs")
          ->each([&](const std::string& v) { train_over["pretrain_epochs"] = std::stoi(v); });
      cmd->add_option("--pretrain-lr", pre_lr, "stage-1 step size")
          ->each([&](const std::string& v) { train_over["pretrain_lr"] = std::stod(v); });
      cmd->add_option("--mix", mix_text, "corruption mix weights random,segment,channel");
      cmd->add_option("--loss-domain", domain, "log|euclid reconstruction loss")
          ->each([&](const std::string& v) { train_over["loss_domain"] = v; });
    }
    if (finetune_stage) {
      cmd->add_option("--finetune-epochs", fin_epochs, "stage-2 epochs")
          ->each([&](const std::string& v) { train_over["finetune_epochs"] = std::stoi(v); });
      cmd->add_option("--finetune-lr", fin_lr, "stage-2 step size")
          ->each([&](const std::string& v) { train_over["finetune_lr"] = std::stod(v); });
      cmd->add_option("--encoder-lr-mult", enc_mult, "encoder step multiplier in stage 2")
          ->each([&](const std::string& v) { train_over["encoder_lr_mult"] = std::stod(v); });
      cmd->add_option("--label-fraction", frac, "labeled fraction of the training folds")
          ->each([&](const std::string& v) { train_over["label_fraction"] = std::stod(v); });
      cmd->add_flag("--freeze-encoder", freeze_encoder, "train only the classifier head");
    }
    cmd->add_option("--batch", batch, "recordings per optimizer step")
        ->each([&](const std::string& v) { train_over["batch"] = std::stoi(v); });
    cmd->add_option("--jitter", jitter, "Gaussian jitter scale before correlation")
        ->each([&](const std::string& v) { train_over["jitter"] = std::stod(v); });
  };

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic two-class dataset");
  add_common(generate, false);
  {
    static int spc, sps, chans, samples;
    static double delta, rate;
    generate->add_option("--subjects-per-class", spc, "subjects per class")
        ->each([&](const std::string& v) { generate_over["subjects_per_class"] = std::stoi(v); });
    generate->add_option("--segments-per-subject", sps, "recordings per subject")
        ->each([&](const std::string& v) { generate_over["segments_per_subject"] = std::stoi(v); });
    generate->add_option("--channels", chans, "channel count")
        ->each([&](const std::string& v) { generate_over["channels"] = std::stoi(v); });
    generate->add_option("--samples", samples, "samples per recording")
        ->each([&](const std::string& v) { generate_over["samples"] = std::stoi(v); });
    generate->add_option("--delta", delta, "class gap in block correlation")
        ->each([&](const std::string& v) { generate_over["delta"] = std::stod(v); });
    generate->add_option("--sampling-rate", rate, "sampling rate in Hz")
        ->each([&](const std::string& v) { generate_over["sampling_rate"] = std::stod(v); });
  }

  CLI::App* pretrain = app.add_subcommand("pretrain", "stage-1 masked state-reconstruction training");
  add_common(pretrain, true);
  add_model_flags(pretrain);
  add_train_flags(pretrain, true, false);
  pretrain->add_option("--checkpoint", common.checkpoint, "continue from this checkpoint");

  CLI::App* finetune = app.add_subcommand("finetune", "stage-2 limited-label fine-tuning");
  add_common(finetune, true);
  add_train_flags(finetune, false, true);
  finetune->add_option("--checkpoint", common.checkpoint, "pre-trained checkpoint")->required();

  CLI::App* evalc = app.add_subcommand("eval", "score a checkpoint on a dataset");
  add_common(evalc, true);
  evalc->add_option("--checkpoint", common.checkpoint, "checkpoint to score")->required();
  evalc->add_option("--corrupt", common.corrupt, "corruption spec applied to test data");
  {
    static double jitter;
    evalc->add_option("--jitter", jitter, "Gaussian jitter scale before correlation")
        ->each([&](const std::string& v) { train_over["jitter"] = std::stod(v); });
  }

  CLI::App* xval = app.add_subcommand("xval", "full cross-validation: pretrain, finetune, test per fold");
  add_common(xval, true);
  add_model_flags(xval);
  add_train_flags(xval, true, true);
  xval->add_option("--folds", folds, "fold count");
  xval->add_option("--corrupt", common.corrupt, "corruption spec applied to test folds");
  xval->add_flag("--no-ssl", no_ssl, "skip stage-1 pre-training (from-scratch baseline)");

  CLI::App* corrupt = app.add_subcommand("corrupt", "apply a corruption spec to dataset files");
  add_common(corrupt, false);
  corrupt->add_option("--manifest", common.manifest, "dataset manifest.json");
  corrupt->add_option("--corrupt", common.corrupt, "corruption spec")->required();

  CLI::App* report = app.add_subcommand("report", "render metrics.json as a text table");
  report->add_option("--metrics", metrics_path, "metrics.json path")->required();

  CLI11_PARSE(app, argc, argv);

  json cfg = common.config_file.empty() ? json::object() : load_config_file(common.config_file);
  auto set_if = [&cfg](const std::string& key, const json& value) { cfg[key] = value; };
  if (!common.out.empty()) set_if("out", common.out);
  if (common.seed_set) set_if("seed", common.seed);
  if (!common.manifest.empty()) cfg["data"]["manifest"] = common.manifest;
  if (!common.layout.empty()) cfg["data"]["layout"] = common.layout;
  if (!common.checkpoint.empty()) set_if("checkpoint", common.checkpoint);
  if (!common.corrupt.empty()) set_if("corrupt", common.corrupt);
  if (folds > 0) set_if("folds", folds);
  if (!mix_text.empty()) train_over["mix"] = parse_mix(mix_text);
  if (no_ssl) train_over["ssl"] = false;
  if (freeze_encoder) train_over["freeze_encoder"] = true;
  if (no_filters) model_over["use_filters"] = false;
  if (no_gpe) model_over["use_gpe"] = false;
  for (const auto& [key, value] : model_over.items()) cfg["model"][key] = value;
  for (const auto& [key, value] : train_over.items()) cfg["train"][key] = value;
  for (const auto& [key, value] : generate_over.items()) cfg["generate"][key] = value;

  const std::string config_text = cfg.dump();

  if (generate->parsed()) return finish(remind_generate(config_text.c_str()));
  if (pretrain->parsed()) return finish(remind_pretrain(config_text.c_str()));
  if (finetune->parsed()) return finish(remind_finetune(config_text.c_str()));
  if (evalc->parsed()) {
    remind_status status = remind_eval(config_text.c_str());
    if (status == REMIND_OK) {
      std::string metrics = cfg["out"].get<std::string>() + "/metrics.json";
      char* text = nullptr;
      if (remind_report_render(metrics.c_str(), &text) == REMIND_OK) {
        std::cout << text;
        remind_string_free(text);
      }
    }
    return finish(status);
  }
  if (xval->parsed()) {
    remind_status status = remind_xval(config_text.c_str());
    if (status == REMIND_OK) {
      std::string metrics = cfg["out"].get<std::string>() + "/metrics.json";
      char* text = nullptr;
      if (remind_report_render(metrics.c_str(), &text) == REMIND_OK) {
        std::cout << text;
        remind_string_free(text);
      }
    }
    return finish(status);
  }
  if (corrupt->parsed()) return finish(remind_corrupt(config_text.c_str()));
  if (report->parsed()) {
    char* text = nullptr;
    remind_status status = remind_report_render(metrics_path.c_str(), &text);
    if (status == REMIND_OK) {
      std::cout << text;
      remind_string_free(text);
    }
    return finish(status);
  }
  return kExitUsage;
}
