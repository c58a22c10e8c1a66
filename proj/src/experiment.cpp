#include "remind/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "remind/error.hpp"
#include "remind/rng.hpp"
#include "remind/spd.hpp"

namespace remind::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) fail(ErrorCode::Usage, "unknown config key '" + key + "' in " + where);
}

json section_defaults(const std::string& name) {
  if (name == "data") return json{{"manifest", ""}, {"layout", ""}};
  if (name == "model")
    return json{{"channels", 0},   {"samples", 0},     {"segments", 8},  {"d_enc", 8},
                {"kernel", 15},    {"classes", 2},     {"hidden_mult", 4}, {"gamma", 1e-3},
                {"epsilon", 1e-6}, {"nonlinearity", "none"}, {"use_filters", true}, {"use_gpe", true}};
  if (name == "train")
    return json{{"pretrain_epochs", 40}, {"finetune_epochs", 80}, {"batch", 8},
                {"pretrain_lr", 1e-3},   {"finetune_lr", 1e-3},   {"encoder_lr_mult", 0.1},
                {"label_fraction", 0.1}, {"loss_domain", "log"},  {"mix", json::array({1.0, 1.0, 1.0})},
                {"jitter", 1e-8},        {"freeze_encoder", false}, {"ssl", true}};
  if (name == "generate")
    return json{{"subjects_per_class", 10}, {"segments_per_subject", 4}, {"channels", 8},
                {"samples", 512},           {"delta", 0.4},              {"sampling_rate", 256.0}};
  return json::object();
}

json merged_section(const json& in, const std::string& name) {
  json out = section_defaults(name);
  if (!in.contains(name)) return out;
  if (!in[name].is_object()) fail(ErrorCode::Usage, "config section '" + name + "' must be an object");
  std::set<std::string> allowed;
  for (const auto& [key, value] : out.items()) allowed.insert(key);
  require_keys(in[name], allowed, name);
  for (const auto& [key, value] : in[name].items()) out[key] = value;
  return out;
}

bool needs_seed(const std::string& command) { return command != "report"; }

}  // namespace

json merged_model_section(const json& config) { return merged_section(config, "model"); }

json resolve_config(const json& in, const std::string& command) {
  static const std::set<std::string> commands{"generate", "pretrain", "finetune", "eval",
                                              "xval",     "corrupt",  "report"};
  if (!commands.count(command)) fail(ErrorCode::Usage, "unknown command: " + command);
  require_keys(in, {"command", "seed", "out", "data", "model", "train", "generate", "folds",
                    "corrupt", "checkpoint", "metrics"},
               "config");

  json cfg;
  cfg["command"] = command;
  cfg["seed"] = in.value("seed", json());
  cfg["out"] = in.value("out", "");
  cfg["data"] = merged_section(in, "data");
  cfg["model"] = merged_section(in, "model");
  cfg["train"] = merged_section(in, "train");
  cfg["generate"] = merged_section(in, "generate");
  cfg["folds"] = in.value("folds", 3);
  cfg["corrupt"] = in.value("corrupt", "kind=none");
  cfg["checkpoint"] = in.value("checkpoint", "");
  cfg["metrics"] = in.value("metrics", "");

  if (needs_seed(command)) {
    if (cfg["seed"].is_null()) fail(ErrorCode::Usage, "command '" + command + "' needs a seed");
    if (!cfg["seed"].is_number_unsigned() && !cfg["seed"].is_number_integer())
      fail(ErrorCode::Usage, "seed must be an integer");
    if (cfg["out"].get<std::string>().empty())
      fail(ErrorCode::Usage, "command '" + command + "' needs an output directory");
  }
  if (command == "pretrain" || command == "finetune" || command == "eval" || command == "xval") {
    if (cfg["data"]["manifest"].get<std::string>().empty())
      fail(ErrorCode::Usage, "command '" + command + "' needs data.manifest");
    if (cfg["data"]["layout"].get<std::string>().empty())
      fail(ErrorCode::Usage, "command '" + command + "' needs data.layout");
  }
  if (command == "finetune" || command == "eval") {
    if (cfg["checkpoint"].get<std::string>().empty())
      fail(ErrorCode::Usage, "command '" + command + "' needs a checkpoint");
  }
  if (command == "corrupt" && cfg["data"]["manifest"].get<std::string>().empty())
    fail(ErrorCode::Usage, "corrupt needs data.manifest");
  if (command == "report" && cfg["metrics"].get<std::string>().empty())
    fail(ErrorCode::Usage, "report needs a metrics file");
  if (command == "xval") {
    int k = cfg["folds"].get<int>();
    if (k < 2) fail(ErrorCode::Usage, "xval needs at least 2 folds");
  }
  corruption::parse_spec(cfg["corrupt"].get<std::string>());  // validates the text

  const json& m = cfg["model"];
  std::string nl = m["nonlinearity"].get<std::string>();
  if (nl != "none" && nl != "tanh") fail(ErrorCode::Usage, "nonlinearity must be 'none' or 'tanh'");
  const json& t = cfg["train"];
  if (!t["mix"].is_array() || t["mix"].size() != 3)
    fail(ErrorCode::Usage, "train.mix must be an array of 3 weights");
  std::string domain = t["loss_domain"].get<std::string>();
  if (domain != "log" && domain != "euclid") fail(ErrorCode::Usage, "loss_domain must be 'log' or 'euclid'");
  return cfg;
}

model::ModelDims dims_from_config(const json& resolved) {
  const json& m = resolved.at("model");
  model::ModelDims dims;
  dims.channels = m.at("channels").get<int>();
  dims.samples = m.at("samples").get<int>();
  dims.segments = m.at("segments").get<int>();
  dims.d_enc = m.at("d_enc").get<int>();
  dims.kernel = m.at("kernel").get<int>();
  dims.classes = m.at("classes").get<int>();
  dims.hidden_mult = m.at("hidden_mult").get<int>();
  dims.gamma = m.at("gamma").get<double>();
  dims.epsilon = m.at("epsilon").get<double>();
  dims.tanh_after_mix = m.at("nonlinearity").get<std::string>() == "tanh";
  dims.use_filters = m.at("use_filters").get<bool>();
  dims.use_gpe = m.at("use_gpe").get<bool>();
  model::validate_dims(dims);
  return dims;
}

train::TrainConfig train_from_config(const json& resolved, train::Stage stage) {
  const json& t = resolved.at("train");
  train::TrainConfig cfg;
  cfg.stage = stage;
  cfg.epochs = stage == train::Stage::Pretrain ? t.at("pretrain_epochs").get<int>()
                                               : t.at("finetune_epochs").get<int>();
  cfg.batch_size = t.at("batch").get<int>();
  cfg.step_size = stage == train::Stage::Pretrain ? t.at("pretrain_lr").get<double>()
                                                  : t.at("finetune_lr").get<double>();
  cfg.encoder_lr_mult = t.at("encoder_lr_mult").get<double>();
  cfg.seed = resolved.at("seed").get<std::uint64_t>();
  cfg.loss_domain = t.at("loss_domain").get<std::string>() == "euclid" ? ssl::LossDomain::Euclid
                                                                       : ssl::LossDomain::Log;
  for (int i = 0; i < 3; ++i) cfg.corruption_mix[static_cast<std::size_t>(i)] = t.at("mix")[static_cast<std::size_t>(i)].get<double>();
  cfg.label_fraction = t.at("label_fraction").get<double>();
  cfg.freeze_encoder = t.at("freeze_encoder").get<bool>();
  cfg.jitter = t.at("jitter").get<double>();
  train::validate_train_config(cfg);
  return cfg;
}

void write_run_json(const json& resolved, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out_dir);
  write_json_file(resolved, (fs::path(out_dir) / "run.json").string());
}

int worker_cap() {
  const char* env = std::getenv("REMIND_THREADS");
  if (!env) return 1;
  int v = std::atoi(env);
  return v < 1 ? 1 : v;
}

namespace {

/// Fills model.channels/samples from the dataset when left at 0 (infer).
void infer_dims(json& resolved, const data::Dataset& dataset) {
  json& m = resolved["model"];
  int C = dataset.signal(0).channels();
  int T = dataset.signal(0).samples();
  if (m["channels"].get<int>() == 0) m["channels"] = C;
  if (m["samples"].get<int>() == 0) m["samples"] = T;
  if (m["channels"].get<int>() != C || m["samples"].get<int>() != T)
    fail(ErrorCode::Usage, "model dims disagree with the dataset");
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset.signal(i).channels() != C || dataset.signal(i).samples() != T)
      fail(ErrorCode::Data, "dataset mixes recording shapes");
}

frontend::ElectrodeLayout load_layout_checked(const json& resolved, int channels) {
  frontend::ElectrodeLayout layout =
      frontend::load_layout(resolved.at("data").at("layout").get<std::string>());
  if (layout.channels() != channels) fail(ErrorCode::Usage, "layout channel count disagrees with data");
  return layout;
}

json loss_curve_json(const std::vector<double>& curve) {
  json losses = json::array();
  for (double v : curve) losses.push_back(v);
  return losses;
}

struct SubjectScores {
  std::vector<int> preds;
  std::vector<int> labels;
};

}  // namespace

json evaluate(const model::ModelDims& dims, const model::ParamSet& params,
              const data::Dataset& dataset, const frontend::ElectrodeLayout& layout,
              const corruption::CorruptionSpec& spec, double jitter, std::uint64_t seed) {
  if (dataset.size() == 0) fail(ErrorCode::Data, "empty evaluation dataset");

  std::vector<int> seg_preds, seg_labels;
  std::map<std::string, std::vector<int>> subj_preds;
  std::map<std::string, std::vector<Vec>> subj_probs;
  std::map<std::string, int> subj_labels;

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    frontend::Recording rec = dataset.signal(i);
    if (spec.kind != corruption::Kind::None) {
      corruption::CorruptionSpec per = spec;
      per.seed = derive_seed(spec.seed, "per-recording", i);
      rec = corruption::apply(per, rec).corrupted;
    }
    Vec probs = train::classify(params, dims, layout, rec, jitter, derive_seed(seed, "eval-noise", i));
    int pred = 0;
    probs.maxCoeff(&pred);

    int truth = dataset.label(i);
    seg_preds.push_back(pred);
    seg_labels.push_back(truth);
    const std::string& subject = dataset.subject(i);
    subj_preds[subject].push_back(pred);
    subj_probs[subject].push_back(probs);
    auto [it, inserted] = subj_labels.emplace(subject, truth);
    if (!inserted && it->second != truth)
      fail(ErrorCode::Data, "subject " + subject + " has inconsistent labels");
  }

  std::vector<int> agg_preds, agg_labels;
  for (const auto& [subject, preds] : subj_preds) {
    agg_preds.push_back(data::subject_aggregate(preds, subj_probs[subject]));
    agg_labels.push_back(subj_labels[subject]);
  }

  data::BasicMetrics seg = data::compute_metrics(seg_preds, seg_labels);
  data::BasicMetrics subj = data::compute_metrics(agg_preds, agg_labels);
  return json{{"segment_accuracy", seg.accuracy},
              {"segment_macro_f1", seg.macro_f1},
              {"subject_accuracy", subj.accuracy},
              {"subject_macro_f1", subj.macro_f1},
              {"n_segments", seg_preds.size()},
              {"n_subjects", agg_preds.size()}};
}

json cmd_generate(const json& resolved) {
  const json& g = resolved.at("generate");
  data::GeneratorConfig cfg;
  cfg.seed = resolved.at("seed").get<std::uint64_t>();
  cfg.subjects_per_class = g.at("subjects_per_class").get<int>();
  cfg.segments_per_subject = g.at("segments_per_subject").get<int>();
  cfg.channels = g.at("channels").get<int>();
  cfg.samples = g.at("samples").get<int>();
  cfg.delta = g.at("delta").get<double>();
  cfg.sampling_rate = g.at("sampling_rate").get<double>();

  std::string out_dir = resolved.at("out").get<std::string>();
  write_run_json(resolved, out_dir);
  std::string manifest = data::generate_synthetic(cfg, out_dir);
  return json{{"manifest", manifest}};
}

json cmd_pretrain(const json& resolved) {
  data::Dataset dataset = data::Dataset::open(resolved.at("data").at("manifest").get<std::string>());
  json cfg = resolved;
  infer_dims(cfg, dataset);
  model::ModelDims dims = dims_from_config(cfg);

  std::string checkpoint_in = cfg.at("checkpoint").get<std::string>();
  model::ParamSet params =
      model::init_params(dims, derive_seed(cfg.at("seed").get<std::uint64_t>(), "init"));
  if (!checkpoint_in.empty()) {
    model::Checkpoint cp = model::load_checkpoint(checkpoint_in);
    if (cp.dims.channels != dims.channels || cp.dims.samples != dims.samples)
      fail(ErrorCode::Usage, "checkpoint dims disagree with the dataset");
    dims = cp.dims;
    params = std::move(cp.params);
  }
  frontend::ElectrodeLayout layout = load_layout_checked(cfg, dims.channels);

  train::TrainConfig tcfg = train_from_config(cfg, train::Stage::Pretrain);
  std::vector<const frontend::Recording*> recordings;
  for (std::size_t i = 0; i < dataset.size(); ++i) recordings.push_back(&dataset.signal(i));

  std::uint64_t reads_before = dataset.label_reads();
  std::vector<double> curve = train::pretrain(params, dims, layout, recordings, tcfg);
  std::uint64_t label_reads = dataset.label_reads() - reads_before;

  std::string out_dir = cfg.at("out").get<std::string>();
  write_run_json(cfg, out_dir);
  model::save_checkpoint((fs::path(out_dir) / "checkpoint.rmnd").string(), dims, params);
  json result{{"losses", loss_curve_json(curve)}, {"label_reads", label_reads}};
  write_json_file(result, (fs::path(out_dir) / "pretrain_loss.json").string());
  return result;
}

json cmd_finetune(const json& resolved) {
  data::Dataset dataset = data::Dataset::open(resolved.at("data").at("manifest").get<std::string>());
  json cfg = resolved;
  infer_dims(cfg, dataset);
  model::Checkpoint cp = model::load_checkpoint(cfg.at("checkpoint").get<std::string>());
  model::ModelDims dims = dims_from_config(cfg);
  if (cp.dims.channels != dims.channels || cp.dims.samples != dims.samples)
    fail(ErrorCode::Usage, "checkpoint dims disagree with the dataset");
  dims = cp.dims;
  frontend::ElectrodeLayout layout = load_layout_checked(cfg, dims.channels);

  train::TrainConfig tcfg = train_from_config(cfg, train::Stage::Finetune);
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  std::vector<std::size_t> labeled_rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset.has_label(i)) {
      labeled_rows.push_back(i);
      labels.push_back(dataset.label(i));
    }
  if (labeled_rows.empty()) fail(ErrorCode::Data, "no labeled entries to fine-tune on");
  std::vector<std::size_t> picked =
      data::stratified_sample(labels, tcfg.label_fraction, derive_seed(seed, "labels"));

  std::vector<train::LabeledExample> examples;
  for (std::size_t j : picked) {
    std::size_t row = labeled_rows[j];
    examples.push_back({&dataset.signal(row), labels[j], derive_seed(seed, "jitter-key", row)});
  }

  std::vector<double> curve = train::finetune(cp.params, dims, layout, examples, tcfg);

  std::string out_dir = cfg.at("out").get<std::string>();
  write_run_json(cfg, out_dir);
  model::save_checkpoint((fs::path(out_dir) / "checkpoint.rmnd").string(), dims, cp.params);
  json result{{"losses", loss_curve_json(curve)}, {"labeled_examples", examples.size()}};
  write_json_file(result, (fs::path(out_dir) / "finetune_loss.json").string());
  return result;
}

json cmd_eval(const json& resolved) {
  data::Dataset dataset = data::Dataset::open(resolved.at("data").at("manifest").get<std::string>());
  json cfg = resolved;
  infer_dims(cfg, dataset);
  model::Checkpoint cp = model::load_checkpoint(cfg.at("checkpoint").get<std::string>());
  if (cp.dims.channels != cfg["model"]["channels"].get<int>() ||
      cp.dims.samples != cfg["model"]["samples"].get<int>())
    fail(ErrorCode::Usage, "checkpoint dims disagree with the dataset");
  frontend::ElectrodeLayout layout = load_layout_checked(cfg, cp.dims.channels);

  corruption::CorruptionSpec spec = corruption::parse_spec(cfg.at("corrupt").get<std::string>());
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  if (spec.seed == 0) spec.seed = derive_seed(seed, "corrupt");
  double jitter = cfg.at("train").at("jitter").get<double>();

  json metrics = evaluate(cp.dims, cp.params, dataset, layout, spec, jitter, seed);
  metrics["corruption"] = corruption::spec_to_string(spec);
  metrics["seed"] = seed;

  std::string out_dir = cfg.at("out").get<std::string>();
  write_run_json(cfg, out_dir);
  write_json_file(metrics, (fs::path(out_dir) / "metrics.json").string());
  return metrics;
}

namespace {

struct FoldOutcome {
  json metrics;
  std::uint64_t label_reads_pretrain = 0;
  std::size_t subject_overlap = 0;
};

FoldOutcome run_fold(const json& cfg, const data::Dataset& dataset,
                     const frontend::ElectrodeLayout& layout, const model::ModelDims& dims,
                     const data::FoldPlan& plan, int fold, const corruption::CorruptionSpec& spec) {
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  bool ssl_on = cfg.at("train").at("ssl").get<bool>();

  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (plan.assignment.at(dataset.subject(i)) == fold)
      test_rows.push_back(i);
    else
      train_rows.push_back(i);
  }
  if (train_rows.empty() || test_rows.empty()) fail(ErrorCode::Data, "degenerate fold split");

  data::Dataset train_ds = dataset.subset(train_rows);
  data::Dataset test_ds = dataset.subset(test_rows);

  std::set<std::string> train_subjects, test_subjects;
  for (std::size_t i = 0; i < train_ds.size(); ++i) train_subjects.insert(train_ds.subject(i));
  for (std::size_t i = 0; i < test_ds.size(); ++i) test_subjects.insert(test_ds.subject(i));
  std::vector<std::string> overlap;
  std::set_intersection(train_subjects.begin(), train_subjects.end(), test_subjects.begin(),
                        test_subjects.end(), std::back_inserter(overlap));

  std::string fold_dir =
      (fs::path(cfg.at("out").get<std::string>()) / ("fold_" + std::to_string(fold))).string();
  std::error_code ec;
  fs::create_directories(fold_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + fold_dir);

  model::ParamSet params =
      model::init_params(dims, derive_seed(seed, "init", static_cast<std::uint64_t>(fold)));

  FoldOutcome outcome;
  outcome.subject_overlap = overlap.size();

  // Stage 1: label-free pre-training on the training folds only.
  if (ssl_on) {
    train::TrainConfig pcfg = train_from_config(cfg, train::Stage::Pretrain);
    pcfg.seed = derive_seed(seed, "pretrain", static_cast<std::uint64_t>(fold));
    std::vector<const frontend::Recording*> recordings;
    for (std::size_t i = 0; i < train_ds.size(); ++i) recordings.push_back(&train_ds.signal(i));
    std::uint64_t before = train_ds.label_reads();
    std::vector<double> curve = train::pretrain(params, dims, layout, recordings, pcfg);
    outcome.label_reads_pretrain = train_ds.label_reads() - before;
    write_json_file(json{{"losses", loss_curve_json(curve)}},
                    (fs::path(fold_dir) / "pretrain_loss.json").string());
  }

  // Stage 2: fine-tuning on a stratified labeled fraction of the training folds.
  train::TrainConfig fcfg = train_from_config(cfg, train::Stage::Finetune);
  fcfg.seed = derive_seed(seed, "finetune", static_cast<std::uint64_t>(fold));
  std::vector<int> labels;
  for (std::size_t i = 0; i < train_ds.size(); ++i) labels.push_back(train_ds.label(i));
  std::vector<std::size_t> picked = data::stratified_sample(
      labels, fcfg.label_fraction, derive_seed(seed, "labels", static_cast<std::uint64_t>(fold)));
  std::vector<train::LabeledExample> examples;
  for (std::size_t row : picked)
    examples.push_back({&train_ds.signal(row), labels[row], derive_seed(fcfg.seed, "jitter-key", row)});
  std::vector<double> curve = train::finetune(params, dims, layout, examples, fcfg);
  write_json_file(json{{"losses", loss_curve_json(curve)}, {"labeled_examples", examples.size()}},
                  (fs::path(fold_dir) / "finetune_loss.json").string());
  model::save_checkpoint((fs::path(fold_dir) / "checkpoint.rmnd").string(), dims, params);

  // Held-out fold evaluation (corruption, if any, hits test data only).
  corruption::CorruptionSpec fold_spec = spec;
  if (fold_spec.kind != corruption::Kind::None)
    fold_spec.seed = derive_seed(spec.seed, "fold", static_cast<std::uint64_t>(fold));
  json metrics = evaluate(dims, params, test_ds, layout, fold_spec, fcfg.jitter,
                          derive_seed(seed, "eval", static_cast<std::uint64_t>(fold)));
  metrics["fold"] = fold;
  metrics["label_reads_pretrain"] = outcome.label_reads_pretrain;
  metrics["train_test_subject_overlap"] = outcome.subject_overlap;
  metrics["labeled_examples"] = examples.size();
  outcome.metrics = std::move(metrics);
  return outcome;
}

}  // namespace

json cmd_xval(const json& resolved) {
  data::Dataset dataset = data::Dataset::open(resolved.at("data").at("manifest").get<std::string>());
  json cfg = resolved;
  infer_dims(cfg, dataset);
  model::ModelDims dims = dims_from_config(cfg);
  frontend::ElectrodeLayout layout = load_layout_checked(cfg, dims.channels);

  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const int k = cfg.at("folds").get<int>();
  data::FoldPlan plan = data::make_folds(dataset, k, derive_seed(seed, "folds"));

  corruption::CorruptionSpec spec = corruption::parse_spec(cfg.at("corrupt").get<std::string>());
  if (spec.seed == 0) spec.seed = derive_seed(seed, "corrupt");

  std::string out_dir = cfg.at("out").get<std::string>();
  write_run_json(cfg, out_dir);

  std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(k));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
  const int cap = std::min(worker_cap(), k);
  for (int base = 0; base < k; base += cap) {
    std::vector<std::thread> workers;
    for (int fold = base; fold < std::min(base + cap, k); ++fold)
      workers.emplace_back([&, fold]() {
        try {
          outcomes[static_cast<std::size_t>(fold)] =
              run_fold(cfg, dataset, layout, dims, plan, fold, spec);
        } catch (...) {
          errors[static_cast<std::size_t>(fold)] = std::current_exception();
        }
      });
    for (auto& w : workers) w.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::vector<std::string> keys{"segment_accuracy", "segment_macro_f1", "subject_accuracy",
                                      "subject_macro_f1"};
  json fold_metrics = json::array();
  json mean = json::object(), stddev = json::object();
  for (const std::string& key : keys) {
    double m = 0.0;
    for (const auto& o : outcomes) m += o.metrics.at(key).get<double>();
    m /= static_cast<double>(k);
    double var = 0.0;
    for (const auto& o : outcomes) {
      double d = o.metrics.at(key).get<double>() - m;
      var += d * d;
    }
    mean[key] = m;
    stddev[key] = std::sqrt(var / static_cast<double>(k));  // population std across folds
  }
  std::uint64_t label_reads_total = 0;
  std::size_t overlap_total = 0;
  for (const auto& o : outcomes) {
    fold_metrics.push_back(o.metrics);
    label_reads_total += o.label_reads_pretrain;
    overlap_total += o.subject_overlap;
  }

  json metrics{{"command", "xval"},
               {"seed", seed},
               {"folds", k},
               {"corruption", corruption::spec_to_string(spec)},
               {"ssl", cfg.at("train").at("ssl").get<bool>()},
               {"fold_metrics", fold_metrics},
               {"mean", mean},
               {"std", stddev},
               {"label_reads_pretrain_total", label_reads_total},
               {"train_test_subject_overlap_total", overlap_total}};
  write_json_file(metrics, (fs::path(out_dir) / "metrics.json").string());
  return metrics;
}

json cmd_corrupt(const json& resolved) {
  std::string manifest_path = resolved.at("data").at("manifest").get<std::string>();
  data::Manifest manifest = data::load_manifest(manifest_path);
  corruption::CorruptionSpec spec = corruption::parse_spec(resolved.at("corrupt").get<std::string>());
  std::uint64_t seed = resolved.at("seed").get<std::uint64_t>();
  if (spec.seed == 0) spec.seed = derive_seed(seed, "corrupt");

  std::string out_dir = resolved.at("out").get<std::string>();
  write_run_json(resolved, out_dir);

  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const data::Entry& e = manifest.entries[i];
    frontend::Recording rec = data::read_recording((fs::path(manifest.root) / e.file).string());
    corruption::CorruptionSpec per = spec;
    if (per.kind != corruption::Kind::None) per.seed = derive_seed(spec.seed, "per-recording", i);
    frontend::Recording corrupted = corruption::apply(per, rec).corrupted;
    data::write_recording(corrupted, (fs::path(out_dir) / e.file).string());
  }
  data::Manifest out_manifest = manifest;
  out_manifest.root = out_dir;
  data::save_manifest(out_manifest, (fs::path(out_dir) / "manifest.json").string());

  // Keep the dataset self-contained if the source shipped a layout.
  fs::path layout_src = fs::path(manifest.root) / "layout.csv";
  if (fs::exists(layout_src)) fs::copy_file(layout_src, fs::path(out_dir) / "layout.csv",
                                            fs::copy_options::overwrite_existing);
  return json{{"manifest", (fs::path(out_dir) / "manifest.json").string()},
              {"corruption", corruption::spec_to_string(spec)},
              {"entries", manifest.entries.size()}};
}

std::string render_report(const json& metrics) {
  char line[256];
  std::string out;
  auto pct = [](double v) { return 100.0 * v; };

  if (metrics.contains("fold_metrics")) {
    std::snprintf(line, sizeof(line), "%-6s %12s %12s %12s %12s\n", "fold", "seg-acc", "seg-f1",
                  "subj-acc", "subj-f1");
    out += line;
    for (const auto& f : metrics.at("fold_metrics")) {
      std::snprintf(line, sizeof(line), "%-6d %12.2f %12.2f %12.2f %12.2f\n", f.at("fold").get<int>(),
                    pct(f.at("segment_accuracy").get<double>()),
                    pct(f.at("segment_macro_f1").get<double>()),
                    pct(f.at("subject_accuracy").get<double>()),
                    pct(f.at("subject_macro_f1").get<double>()));
      out += line;
    }
    const json& mean = metrics.at("mean");
    const json& stddev = metrics.at("std");
    std::snprintf(line, sizeof(line), "%-6s %6.2f (%.2f) %6.2f (%.2f) %6.2f (%.2f) %6.2f (%.2f)\n",
                  "mean", pct(mean.at("segment_accuracy").get<double>()),
                  pct(stddev.at("segment_accuracy").get<double>()),
                  pct(mean.at("segment_macro_f1").get<double>()),
                  pct(stddev.at("segment_macro_f1").get<double>()),
                  pct(mean.at("subject_accuracy").get<double>()),
                  pct(stddev.at("subject_accuracy").get<double>()),
                  pct(mean.at("subject_macro_f1").get<double>()),
                  pct(stddev.at("subject_macro_f1").get<double>()));
    out += line;
    if (metrics.contains("corruption")) out += "corruption: " + metrics.at("corruption").get<std::string>() + "\n";
    out += "label reads during pre-training: " +
           std::to_string(metrics.at("label_reads_pretrain_total").get<std::uint64_t>()) + "\n";
  } else {
    std::snprintf(line, sizeof(line), "%12s %12s %12s %12s\n", "seg-acc", "seg-f1", "subj-acc",
                  "subj-f1");
    out += line;
    std::snprintf(line, sizeof(line), "%12.2f %12.2f %12.2f %12.2f\n",
                  pct(metrics.at("segment_accuracy").get<double>()),
                  pct(metrics.at("segment_macro_f1").get<double>()),
                  pct(metrics.at("subject_accuracy").get<double>()),
                  pct(metrics.at("subject_macro_f1").get<double>()));
    out += line;
    if (metrics.contains("corruption")) out += "corruption: " + metrics.at("corruption").get<std::string>() + "\n";
  }
  return out;
}

}  // namespace remind::experiment
