#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "remind/common.hpp"
#include "remind/frontend.hpp"

namespace remind::data {

struct Entry {
  std::string file;  // recording payload, relative to the manifest directory
  std::string subject_id;
  std::optional<int> label;
  int channels = 0;
  int samples = 0;
  double sampling_rate = 0.0;
};

struct Manifest {
  std::string root;  // directory holding the recording files
  std::vector<Entry> entries;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& manifest, const std::string& path);

/// Recording payload: raw little-endian doubles, channel-major (C rows of T),
/// with a JSON sidecar (same stem, .json) carrying dims/rate/subject/label.
frontend::Recording read_recording(const std::string& f64_path);
void write_recording(const frontend::Recording& rec, const std::string& f64_path);

/// In-memory dataset. Labels are only reachable through label(), which bumps an
/// access counter; the signals handed out carry no label.
class Dataset {
 public:
  static Dataset open(const std::string& manifest_path);

  std::size_t size() const { return recordings_.size(); }
  const frontend::Recording& signal(std::size_t i) const { return recordings_[i]; }
  const std::string& subject(std::size_t i) const { return entries_[i].subject_id; }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  bool has_label(std::size_t i) const { return entries_[i].label.has_value(); }

  /// Audited label read.
  int label(std::size_t i) const;

  std::uint64_t label_reads() const { return label_reads_->load(); }

  /// New dataset holding the selected rows, with a fresh access counter.
  Dataset subset(const std::vector<std::size_t>& indices) const;

  /// Unique subject ids in first-appearance order.
  std::vector<std::string> subjects() const;

 private:
  std::vector<Entry> entries_;
  std::vector<frontend::Recording> recordings_;
  std::shared_ptr<std::atomic<std::uint64_t>> label_reads_ =
      std::make_shared<std::atomic<std::uint64_t>>(0);
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  int subjects_per_class = 10;
  int channels = 8;
  int samples = 512;
  int segments_per_subject = 4;
  double delta = 0.4;         // class gap in block correlation
  double sampling_rate = 256.0;
};

/// Two-class synthetic corpus: channels driven by two latent sources with
/// in-block correlation 0.3 (class 0) vs 0.3 + delta and a shifted block
/// boundary (class 1, only when delta > 0). Writes recordings, layout.csv and
/// manifest.json under out_dir; returns the manifest path. Byte-identical for
/// identical configs.
std::string generate_synthetic(const GeneratorConfig& cfg, const std::string& out_dir);

struct FoldPlan {
  int k = 0;
  std::map<std::string, int> assignment;  // subject -> fold
};

/// Seeded class-stratified subject-level partition.
FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed);

/// Majority vote over segment predictions; ties broken by the higher mean
/// predicted probability among the segments voting for each tied class, then
/// by lower class index.
int subject_aggregate(const std::vector<int>& preds, const std::vector<Vec>& probs);

struct BasicMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

/// Accuracy and unweighted-mean per-class F1 (absent classes score 0).
BasicMetrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels);

/// Seeded per-class sample of floor(fraction * count) items (indices into the
/// labeled vector). A class whose quota is zero raises a stratification error.
std::vector<std::size_t> stratified_sample(const std::vector<int>& labels, double fraction,
                                           std::uint64_t seed);

}  // namespace remind::data
