#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "remind/autodiff.hpp"
#include "remind/common.hpp"
#include "remind/frontend.hpp"
#include "remind/model.hpp"
#include "remind/ssl.hpp"

namespace remind::train {

/// First-order update with exponential moment accumulators (decay 0.9/0.999,
/// epsilon 1e-8, bias correction). encoder_lr_mult scales the step of every
/// group except the classifier head.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double encoder_lr_mult = 1.0;
};

struct AdamState {
  GradSet m;
  GradSet v;
  long step = 0;
};

AdamState make_adam_state(const ParamSet& params);

void optimizer_step(AdamState& state, ParamSet& params, const GradSet& grads, const AdamConfig& cfg);

enum class Stage { Pretrain, Finetune };

struct TrainConfig {
  Stage stage = Stage::Pretrain;
  int epochs = 50;
  int batch_size = 8;
  double step_size = 1e-3;
  double encoder_lr_mult = 0.1;  // finetune only
  std::uint64_t seed = 0;
  ssl::LossDomain loss_domain = ssl::LossDomain::Log;
  std::array<double, 3> corruption_mix{1.0, 1.0, 1.0};
  double label_fraction = 0.10;
  bool freeze_encoder = false;
  double jitter = 1e-8;
};

void validate_train_config(const TrainConfig& cfg);

/// Stage 1: masked-input to intact-target state reconstruction over unlabeled
/// recordings. Targets are rebuilt from the intact signal with the current
/// parameters each step and treated as constants in the backward pass.
/// Returns the per-epoch mean training loss.
std::vector<double> pretrain(ParamSet& params, const ModelDims& dims,
                             const frontend::ElectrodeLayout& layout,
                             const std::vector<const frontend::Recording*>& recordings,
                             const TrainConfig& cfg);

struct LabeledExample {
  const frontend::Recording* recording;
  int label;
  std::uint64_t noise_key;
};

/// Stage 2: cross-entropy on the classifier head over mean-pooled tangent
/// features. The classifier is freshly initialized; encoder groups step at
/// step_size * encoder_lr_mult (or not at all with freeze_encoder).
/// Returns the per-epoch mean training loss.
std::vector<double> finetune(ParamSet& params, const ModelDims& dims,
                             const frontend::ElectrodeLayout& layout,
                             const std::vector<LabeledExample>& examples, const TrainConfig& cfg);

/// Class probabilities for one recording (softmax over the linear head).
Vec classify(const ParamSet& params, const ModelDims& dims, const frontend::ElectrodeLayout& layout,
             const frontend::Recording& x, double jitter = 0.0, std::uint64_t noise_key = 0);

}  // namespace remind::train
