#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "remind/common.hpp"
#include "remind/frontend.hpp"
#include "remind/model.hpp"
#include "remind/spd.hpp"
#include "remind/ssl.hpp"

namespace remind::train {

using model::GradSet;
using model::ModelDims;
using model::ParamSet;

struct ForwardOptions {
  double jitter = 0.0;
};

/// Everything the backward pass needs from one encoder forward. Forward values
/// are produced by the same arithmetic as the module-level operations.
struct EncoderTrace {
  std::uint64_t noise_key = 0;
  Mat x;                      // C x T input
  Mat conv_out, mix_out, post_nonlin;  // empty when filters are disabled
  Mat gpe;                    // C x d_g (empty when positional encoding is off)
  Mat features;               // C x T after injection
  int seg_len = 0;

  std::vector<Mat> segments;  // jittered C x L windows
  std::vector<Mat> centered;  // mean-centered segments
  std::vector<Vec> norms;     // per-channel centered norms
  std::vector<Mat> corr;      // correlation states
  std::vector<BoolMask> clamped;  // correlation entries clamped at +-1

  std::vector<Mat> shrunk;    // (1-gamma) corr + gamma I
  std::vector<spd::EigenDecomp> eig_shrunk;
  std::vector<bool> floored;
  std::vector<Mat> states;    // SPD states

  std::vector<Mat> Q, K, V;
  std::vector<spd::EigenDecomp> eig_q, eig_k, eig_v;
  std::vector<Mat> log_q, log_k, log_v;
  Mat dist, sim, attn;        // n x n
  std::vector<Mat> attended_log;  // log-domain attended states
};

/// Deterministic encoder forward with cached intermediates. The jitter noise is
/// a pure function of (noise_key, segment index), so repeated calls with the
/// same arguments are bitwise identical.
EncoderTrace forward_encoder(const ParamSet& params, const ModelDims& dims,
                             const frontend::ElectrodeLayout& layout, const Mat& x,
                             const ForwardOptions& opts, std::uint64_t noise_key = 0);

/// exp of the attended log states (the manifold-valued outputs).
SpdSequence attended_states(const EncoderTrace& trace);

/// Daleckii-Krein adjoint of a spectral matrix function h(A) = V f(L) V^T.
/// Divided differences below the 1e-10 eigenvalue gap use f'(lambda_i).
Mat spectral_adjoint(const spd::EigenDecomp& eig, const Mat& gbar,
                     const std::function<double(double)>& f,
                     const std::function<double(double)>& fprime);

/// Accumulates d loss / d params given d loss / d attended_log into grads.
void backward_encoder(const EncoderTrace& trace, const ParamSet& params, const ModelDims& dims,
                      const frontend::ElectrodeLayout& layout,
                      const std::vector<Mat>& attended_log_bar, GradSet& grads);

enum class ObjectiveKind { Recon, Classify };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::Recon;
  ssl::LossDomain domain = ssl::LossDomain::Log;
  double loss_scale = 1.0;
};

/// One training example. Recon objectives use the target states (and their
/// logs, precomputed once); classify objectives use the label.
struct BatchItem {
  Mat input;
  SpdSequence targets;
  SpdSequence target_logs;
  int label = -1;
  std::uint64_t noise_key = 0;
};

/// Mean objective value over the batch (loss_scale applied).
double batch_loss(const ParamSet& params, const ModelDims& dims,
                  const frontend::ElectrodeLayout& layout, const std::vector<BatchItem>& batch,
                  const Objective& objective, const ForwardOptions& opts);

/// Loss plus exact reverse-mode gradients for every parameter group. Raises a
/// numeric error naming the offending group if anything goes non-finite.
double grad(const ParamSet& params, const ModelDims& dims, const frontend::ElectrodeLayout& layout,
            const std::vector<BatchItem>& batch, const Objective& objective,
            const ForwardOptions& opts, GradSet& grads);

/// Zeroes every encoder group (all but the classifier head).
void zero_encoder_grads(GradSet& grads);

}  // namespace remind::train
