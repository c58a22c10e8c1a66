#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "remind/attention.hpp"
#include "remind/common.hpp"
#include "remind/frontend.hpp"
#include "remind/ssl.hpp"

namespace remind::model {

/// Fixed architecture hyperparameters. Everything trainable lives in ParamSet.
struct ModelDims {
  int channels = 8;    // C
  int samples = 512;   // T
  int segments = 8;    // n
  int d_enc = 8;       // per-axis positional width; the encoding has 3*d_enc columns
  int kernel = 15;     // temporal kernel length, odd
  int classes = 2;
  int hidden_mult = 4; // reconstruction head width = hidden_mult * d
  double gamma = 1e-3; // shrinkage toward identity
  double epsilon = 1e-6;  // eigenvalue floor
  bool tanh_after_mix = false;
  bool use_filters = true;  // ablation: identity frontend when false
  bool use_gpe = true;      // ablation: no positional injection when false

  int d() const { return channels * (channels + 1) / 2; }
  int d_g() const { return 3 * d_enc; }
  int hidden() const { return hidden_mult * d(); }
};

void validate_dims(const ModelDims& dims);

struct Classifier {
  Mat W;  // classes x d
  Vec b;  // classes
};

/// All trainable values.
struct ParamSet {
  frontend::FrontendParams frontend;
  attention::AttentionParams attention;
  ssl::ReconHead recon;
  Classifier classifier;
};

/// Same shapes as ParamSet; used for gradients and optimizer moments.
using GradSet = ParamSet;

/// Seeded initialization: impulse temporal kernel, identity spatial mix, unit
/// gains, Gaussian(0.01) positional projection, identity-plus-noise attention
/// weights, scaled-Gaussian reconstruction head, zero classifier.
ParamSet init_params(const ModelDims& dims, std::uint64_t seed);

ParamSet zeros_like(const ParamSet& p);

/// A named view over one learnable array. Groups appear in checkpoint order;
/// matrices are stored column-major (Eigen native).
struct ParamGroup {
  std::string name;
  double* data;
  Eigen::Index size;
  bool encoder;  // false only for the classifier head
};

std::vector<ParamGroup> param_groups(ParamSet& p);
std::vector<ParamGroup> param_groups_const(const ParamSet& p);  // const-cast free view for reads

bool all_finite(const ParamSet& p);

/// Model checkpoint: magic "RMND", u32 version, architecture fields, then the
/// raw little-endian doubles of every parameter group in param_groups order.
void save_checkpoint(const std::string& path, const ModelDims& dims, const ParamSet& params);
struct Checkpoint {
  ModelDims dims;
  ParamSet params;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace remind::model
