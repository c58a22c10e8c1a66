#include "remind/train.hpp"

#include <cmath>
#include <numeric>

#include "remind/corruption.hpp"
#include "remind/error.hpp"
#include "remind/rng.hpp"
#include "remind/spd.hpp"

namespace remind::train {

AdamState make_adam_state(const ParamSet& params) {
  AdamState state;
  state.m = model::zeros_like(params);
  state.v = model::zeros_like(params);
  return state;
}

void optimizer_step(AdamState& state, ParamSet& params, const GradSet& grads, const AdamConfig& cfg) {
  if (!(cfg.lr > 0.0)) fail(ErrorCode::Parameter, "step size must be positive");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  auto pg = model::param_groups(params);
  auto gg = model::param_groups_const(grads);
  auto mg = model::param_groups(state.m);
  auto vg = model::param_groups(state.v);
  for (std::size_t gi = 0; gi < pg.size(); ++gi) {
    if (pg[gi].size != gg[gi].size) fail(ErrorCode::Shape, "gradient shape mismatch");
    const double lr = cfg.lr * (pg[gi].encoder ? cfg.encoder_lr_mult : 1.0);
    for (Eigen::Index i = 0; i < pg[gi].size; ++i) {
      double g = gg[gi].data[i];
      double m = cfg.beta1 * mg[gi].data[i] + (1.0 - cfg.beta1) * g;
      double v = cfg.beta2 * vg[gi].data[i] + (1.0 - cfg.beta2) * g * g;
      mg[gi].data[i] = m;
      vg[gi].data[i] = v;
      double update = lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
      if (!std::isfinite(update))
        fail(ErrorCode::Numeric, "non-finite optimizer update in group " + pg[gi].name);
      pg[gi].data[i] -= update;
    }
  }
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) fail(ErrorCode::Parameter, "epochs must be positive");
  if (cfg.batch_size < 1) fail(ErrorCode::Parameter, "batch size must be positive");
  if (!(cfg.step_size > 0.0)) fail(ErrorCode::Parameter, "step size must be positive");
  if (!(cfg.label_fraction > 0.0 && cfg.label_fraction <= 1.0))
    fail(ErrorCode::Parameter, "label fraction must lie in (0, 1]");
  if (cfg.jitter < 0.0) fail(ErrorCode::Parameter, "jitter must be non-negative");
  for (double w : cfg.corruption_mix)
    if (w < 0.0) fail(ErrorCode::Parameter, "negative corruption mix weight");
}

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "order", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  return order;
}

}  // namespace

std::vector<double> pretrain(ParamSet& params, const ModelDims& dims,
                             const frontend::ElectrodeLayout& layout,
                             const std::vector<const frontend::Recording*>& recordings,
                             const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (recordings.empty()) fail(ErrorCode::Data, "pre-training needs at least one recording");

  AdamState state = make_adam_state(params);
  AdamConfig adam;
  adam.lr = cfg.step_size;
  GradSet grads = model::zeros_like(params);
  ForwardOptions opts{cfg.jitter};
  Objective objective{ObjectiveKind::Recon, cfg.loss_domain, 1.0};

  const std::size_t n_rec = recordings.size();
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = epoch_order(n_rec, cfg.seed, epoch);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < n_rec; start += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<BatchItem> batch;
      std::size_t stop = std::min(n_rec, start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t pos = start; pos < stop; ++pos) {
        std::size_t ri = order[pos];
        const frontend::Recording& rec = *recordings[ri];
        std::uint64_t noise_key = derive_seed(cfg.seed, "jitter-key", ri);
        auto spec = corruption::sample_mix(
            cfg.corruption_mix,
            derive_seed(cfg.seed, "mask", static_cast<std::uint64_t>(epoch) * n_rec + ri));
        ssl::PretrainPair pair = ssl::pretrain_target_and_input(
            rec, spec, params.frontend, layout, dims.gamma, dims.epsilon, cfg.jitter, noise_key);

        BatchItem item;
        item.input = std::move(pair.masked.data);
        item.targets = std::move(pair.targets);
        item.target_logs.reserve(item.targets.size());
        for (const Mat& t : item.targets) item.target_logs.push_back(spd::spd_log(t));
        item.noise_key = noise_key;
        batch.push_back(std::move(item));
      }
      double loss = grad(params, dims, layout, batch, objective, opts, grads);
      optimizer_step(state, params, grads, adam);
      epoch_loss += loss * static_cast<double>(batch.size());
    }
    curve.push_back(epoch_loss / static_cast<double>(n_rec));
  }
  return curve;
}

std::vector<double> finetune(ParamSet& params, const ModelDims& dims,
                             const frontend::ElectrodeLayout& layout,
                             const std::vector<LabeledExample>& examples, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (examples.empty()) fail(ErrorCode::Data, "fine-tuning needs at least one labeled example");
  for (const LabeledExample& ex : examples)
    if (ex.label < 0 || ex.label >= dims.classes) fail(ErrorCode::Data, "label out of range");

  // Fresh head on top of the (pre-trained) encoder.
  params.classifier.W.setZero();
  params.classifier.b.setZero();

  AdamState state = make_adam_state(params);
  AdamConfig adam;
  adam.lr = cfg.step_size;
  adam.encoder_lr_mult = cfg.freeze_encoder ? 0.0 : cfg.encoder_lr_mult;
  GradSet grads = model::zeros_like(params);
  ForwardOptions opts{cfg.jitter};
  Objective objective{ObjectiveKind::Classify, cfg.loss_domain, 1.0};

  const std::size_t n_ex = examples.size();
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = epoch_order(n_ex, cfg.seed, epoch);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < n_ex; start += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<BatchItem> batch;
      std::size_t stop = std::min(n_ex, start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t pos = start; pos < stop; ++pos) {
        const LabeledExample& ex = examples[order[pos]];
        BatchItem item;
        item.input = ex.recording->data;
        item.label = ex.label;
        item.noise_key = ex.noise_key;
        batch.push_back(std::move(item));
      }
      double loss = grad(params, dims, layout, batch, objective, opts, grads);
      if (cfg.freeze_encoder) zero_encoder_grads(grads);
      optimizer_step(state, params, grads, adam);
      epoch_loss += loss * static_cast<double>(batch.size());
    }
    curve.push_back(epoch_loss / static_cast<double>(n_ex));
  }
  return curve;
}

Vec classify(const ParamSet& params, const ModelDims& dims, const frontend::ElectrodeLayout& layout,
             const frontend::Recording& x, double jitter, std::uint64_t noise_key) {
  ForwardOptions opts{jitter};
  EncoderTrace trace = forward_encoder(params, dims, layout, x.data, opts, noise_key);
  Vec pooled = Vec::Zero(dims.d());
  for (const Mat& lv : trace.attended_log) pooled += ssl::sym_vectorize(lv);
  pooled /= static_cast<double>(dims.segments);
  Vec logits = params.classifier.W * pooled + params.classifier.b;
  double mx = logits.maxCoeff();
  Vec e = (logits.array() - mx).exp();
  return e / e.sum();
}

}  // namespace remind::train
