#include "remind/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "remind/error.hpp"
#include "remind/rng.hpp"

namespace remind::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::Data, "bad JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

std::string sidecar_path(const std::string& f64_path) {
  fs::path p(f64_path);
  p.replace_extension(".json");
  return p.string();
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  json j = read_json_file(path);
  Manifest manifest;
  manifest.root = fs::path(path).parent_path().string();
  if (!j.contains("entries") || !j["entries"].is_array())
    fail(ErrorCode::Data, "manifest needs an entries array: " + path);
  for (const auto& e : j["entries"]) {
    Entry entry;
    entry.file = e.at("file").get<std::string>();
    entry.subject_id = e.at("subject_id").get<std::string>();
    if (e.contains("label") && !e["label"].is_null()) entry.label = e["label"].get<int>();
    entry.channels = e.at("channels").get<int>();
    entry.samples = e.at("samples").get<int>();
    entry.sampling_rate = e.at("sampling_rate").get<double>();
    if (entry.subject_id.empty()) fail(ErrorCode::Data, "empty subject id in manifest");
    manifest.entries.push_back(std::move(entry));
  }
  if (manifest.entries.empty()) fail(ErrorCode::Data, "manifest has no entries: " + path);
  for (const Entry& e : manifest.entries)
    if (e.channels != manifest.entries[0].channels ||
        e.sampling_rate != manifest.entries[0].sampling_rate)
      fail(ErrorCode::Data, "manifest entries disagree on channels or sampling rate");
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  json entries = json::array();
  for (const Entry& e : manifest.entries) {
    json je{{"file", e.file},
            {"subject_id", e.subject_id},
            {"channels", e.channels},
            {"samples", e.samples},
            {"sampling_rate", e.sampling_rate}};
    if (e.label)
      je["label"] = *e.label;
    else
      je["label"] = nullptr;
    entries.push_back(std::move(je));
  }
  write_json_file(json{{"entries", entries}}, path);
}

frontend::Recording read_recording(const std::string& f64_path) {
  json side = read_json_file(sidecar_path(f64_path));
  frontend::Recording rec;
  const int C = side.at("channels").get<int>();
  const int T = side.at("samples").get<int>();
  rec.sampling_rate = side.at("sampling_rate").get<double>();
  rec.subject_id = side.at("subject_id").get<std::string>();
  if (side.contains("label") && !side["label"].is_null()) rec.label = side["label"].get<int>();
  if (C < 1 || T < 1) fail(ErrorCode::Data, "bad dims in sidecar of " + f64_path);

  std::ifstream in(f64_path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + f64_path);
  std::vector<double> buf(static_cast<std::size_t>(C) * static_cast<std::size_t>(T));
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!in || in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(double)))
    fail(ErrorCode::Data, "recording payload truncated: " + f64_path);
  char extra = 0;
  if (in.read(&extra, 1)) fail(ErrorCode::Data, "recording payload oversized: " + f64_path);

  rec.data = Mat(C, T);
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t) {
      double v = buf[static_cast<std::size_t>(c) * static_cast<std::size_t>(T) + static_cast<std::size_t>(t)];
      if (!std::isfinite(v)) fail(ErrorCode::Data, "non-finite sample in " + f64_path);
      rec.data(c, t) = v;
    }
  return rec;
}

void write_recording(const frontend::Recording& rec, const std::string& f64_path) {
  const int C = rec.channels(), T = rec.samples();
  std::ofstream out(f64_path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + f64_path);
  std::vector<double> buf(static_cast<std::size_t>(C) * static_cast<std::size_t>(T));
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < T; ++t)
      buf[static_cast<std::size_t>(c) * static_cast<std::size_t>(T) + static_cast<std::size_t>(t)] =
          rec.data(c, t);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!out) fail(ErrorCode::Io, "write failed: " + f64_path);

  json side{{"channels", C},
            {"samples", T},
            {"sampling_rate", rec.sampling_rate},
            {"subject_id", rec.subject_id}};
  if (rec.label)
    side["label"] = *rec.label;
  else
    side["label"] = nullptr;
  write_json_file(side, sidecar_path(f64_path));
}

Dataset Dataset::open(const std::string& manifest_path) {
  Manifest manifest = load_manifest(manifest_path);
  Dataset ds;
  for (Entry& e : manifest.entries) {
    fs::path file = fs::path(manifest.root) / e.file;
    frontend::Recording rec = read_recording(file.string());
    if (rec.channels() != e.channels || rec.samples() != e.samples)
      fail(ErrorCode::Data, "manifest dims disagree with sidecar for " + e.file);
    if (rec.label != e.label) fail(ErrorCode::Data, "manifest label disagrees with sidecar for " + e.file);
    rec.label.reset();  // labels flow through the audited accessor only
    ds.recordings_.push_back(std::move(rec));
    ds.entries_.push_back(std::move(e));
  }
  return ds;
}

int Dataset::label(std::size_t i) const {
  label_reads_->fetch_add(1);
  if (!entries_[i].label) fail(ErrorCode::Data, "entry " + std::to_string(i) + " has no label");
  return *entries_[i].label;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset ds;
  for (std::size_t i : indices) {
    if (i >= size()) fail(ErrorCode::Parameter, "subset index out of range");
    ds.entries_.push_back(entries_[i]);
    ds.recordings_.push_back(recordings_[i]);
  }
  return ds;
}

std::vector<std::string> Dataset::subjects() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const Entry& e : entries_)
    if (seen.insert(e.subject_id).second) out.push_back(e.subject_id);
  return out;
}

std::string generate_synthetic(const GeneratorConfig& cfg, const std::string& out_dir) {
  if (cfg.delta < 0.0 || cfg.delta > 1.0) fail(ErrorCode::Parameter, "class gap must lie in [0, 1]");
  if (cfg.delta > 0.7)
    fail(ErrorCode::Parameter, "class gap above 0.7 exceeds the correlation budget");
  if (cfg.channels < 4) fail(ErrorCode::Parameter, "generator needs at least 4 channels");
  if (cfg.subjects_per_class < 1 || cfg.segments_per_subject < 1 || cfg.samples < 8)
    fail(ErrorCode::Parameter, "bad generator dims");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out_dir);

  // Evenly spread unit-sphere electrode positions (Fibonacci lattice).
  frontend::ElectrodeLayout layout;
  layout.coords = Mat(cfg.channels, 3);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < cfg.channels; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "E%02d", i);
    layout.names.push_back(name);
    double z = 1.0 - 2.0 * (i + 0.5) / cfg.channels;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = golden * i;
    layout.coords(i, 0) = r * std::cos(th);
    layout.coords(i, 1) = r * std::sin(th);
    layout.coords(i, 2) = z;
  }
  frontend::save_layout(layout, (fs::path(out_dir) / "layout.csv").string());

  Manifest manifest;
  manifest.root = out_dir;
  std::uint64_t rec_index = 0;
  for (int cls = 0; cls < 2; ++cls) {
    const double rho = 0.3 + (cls == 1 ? cfg.delta : 0.0);
    const int boundary = cfg.channels / 2 + ((cls == 1 && cfg.delta > 0.0) ? 1 : 0);
    for (int s = 0; s < cfg.subjects_per_class; ++s) {
      char subject[32];
      std::snprintf(subject, sizeof(subject), "c%d_s%03d", cls, s);
      for (int g = 0; g < cfg.segments_per_subject; ++g, ++rec_index) {
        Rng rng(derive_seed(cfg.seed, "synthetic", rec_index));
        Mat sources(2, cfg.samples);
        for (int t = 0; t < cfg.samples; ++t) {
          sources(0, t) = rng.normal();
          sources(1, t) = rng.normal();
        }
        frontend::Recording rec;
        rec.data = Mat(cfg.channels, cfg.samples);
        rec.sampling_rate = cfg.sampling_rate;
        rec.subject_id = subject;
        rec.label = cls;
        const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
        for (int c = 0; c < cfg.channels; ++c) {
          int block = c < boundary ? 0 : 1;
          for (int t = 0; t < cfg.samples; ++t)
            rec.data(c, t) = a * sources(block, t) + b * rng.normal();
        }
        char file[48];
        std::snprintf(file, sizeof(file), "rec_c%d_s%03d_g%02d.f64", cls, s, g);
        write_recording(rec, (fs::path(out_dir) / file).string());

        Entry entry;
        entry.file = file;
        entry.subject_id = subject;
        entry.label = cls;
        entry.channels = cfg.channels;
        entry.samples = cfg.samples;
        entry.sampling_rate = cfg.sampling_rate;
        manifest.entries.push_back(std::move(entry));
      }
    }
  }
  std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  save_manifest(manifest, manifest_path);
  return manifest_path;
}

FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed) {
  // Subject -> class, checked for consistency across the subject's entries.
  std::map<std::string, int> subject_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset.has_label(i)) fail(ErrorCode::Data, "fold planning needs labels on every entry");
    int cls = dataset.label(i);
    auto [it, inserted] = subject_class.emplace(dataset.subject(i), cls);
    if (!inserted && it->second != cls)
      fail(ErrorCode::Data, "subject " + dataset.subject(i) + " has inconsistent labels");
  }
  if (k < 1) fail(ErrorCode::Parameter, "fold count must be positive");
  if (static_cast<std::size_t>(k) > subject_class.size())
    fail(ErrorCode::Parameter, "more folds than subjects");

  std::map<int, std::vector<std::string>> by_class;
  for (const auto& [subject, cls] : subject_class) by_class[cls].push_back(subject);

  FoldPlan plan;
  plan.k = k;
  Rng rng(seed);
  int next_fold = 0;
  for (auto& [cls, subjects] : by_class) {
    rng.shuffle(subjects);
    for (const std::string& subject : subjects) {
      plan.assignment[subject] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return plan;
}

int subject_aggregate(const std::vector<int>& preds, const std::vector<Vec>& probs) {
  if (preds.empty()) fail(ErrorCode::Arity, "no segment predictions to aggregate");
  if (preds.size() != probs.size()) fail(ErrorCode::Shape, "prediction/probability count mismatch");

  std::map<int, int> votes;
  for (int p : preds) votes[p] += 1;
  int best_count = 0;
  for (const auto& [cls, count] : votes) best_count = std::max(best_count, count);

  int winner = -1;
  double winner_conf = -1.0;
  for (const auto& [cls, count] : votes) {
    if (count != best_count) continue;
    double conf = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
      if (preds[i] == cls) {
        conf += probs[i](cls);
        n += 1;
      }
    conf /= static_cast<double>(n);
    if (conf > winner_conf) {  // ties fall through to the lower class index
      winner_conf = conf;
      winner = cls;
    }
  }
  return winner;
}

BasicMetrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size()) fail(ErrorCode::Shape, "prediction/label length mismatch");
  if (preds.empty()) fail(ErrorCode::Arity, "no predictions to score");

  int correct = 0;
  std::set<int> classes;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) ++correct;
    classes.insert(preds[i]);
    classes.insert(labels[i]);
  }

  double f1_sum = 0.0;
  for (int cls : classes) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i] == cls && labels[i] == cls) ++tp;
      if (preds[i] == cls && labels[i] != cls) ++fp;
      if (preds[i] != cls && labels[i] == cls) ++fn;
    }
    double denom = 2.0 * tp + fp + fn;
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }

  BasicMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
  m.macro_f1 = f1_sum / static_cast<double>(classes.size());
  return m;
}

std::vector<std::size_t> stratified_sample(const std::vector<int>& labels, double fraction,
                                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) fail(ErrorCode::Parameter, "fraction must lie in (0, 1]");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::vector<std::size_t> picked;
  Rng rng(seed);
  for (auto& [cls, idx] : by_class) {
    std::size_t quota = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(idx.size()) + 1e-12));
    if (quota == 0)
      fail(ErrorCode::Stratification,
           "class " + std::to_string(cls) + " would be absent from the labeled sample");
    rng.shuffle(idx);
    picked.insert(picked.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace remind::data
