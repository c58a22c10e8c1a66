#pragma once

#include <optional>
#include <string>
#include <vector>

#include "remind/common.hpp"
#include "remind/error.hpp"

namespace remind::frontend {

/// One multichannel recording (C channels x T samples).
struct Recording {
  Mat data;
  double sampling_rate = 0.0;
  std::string subject_id;
  std::optional<int> label;

  int channels() const { return static_cast<int>(data.rows()); }
  int samples() const { return static_cast<int>(data.cols()); }
};

/// Electrode names plus unit-normalized 3-D head coordinates.
struct ElectrodeLayout {
  std::vector<std::string> names;
  Mat coords;  // C x 3

  int channels() const { return static_cast<int>(names.size()); }
};

/// Validates name uniqueness and the [0.5, 1.5] coordinate-norm sanity band.
void validate_layout(const ElectrodeLayout& layout);

/// Text format: header "name,x,y,z", one electrode per row; row order defines
/// channel order.
ElectrodeLayout load_layout(const std::string& path);
void save_layout(const ElectrodeLayout& layout, const std::string& path);

/// All learnable frontend state.
struct FrontendParams {
  Vec temporal_kernel;       // length k_t, odd; shared across channels
  Mat spatial;               // C x C cross-channel mix
  Vec gains;                 // 3 per-axis encoding gains
  Mat proj;                  // d_g x T projection of the positional encoding
  int segments = 1;          // n
  bool tanh_after_mix = false;
};

/// Rejects even kernels, non-positive segment counts and segment lengths
/// below C + 1 (correlation states need headroom).
void validate_frontend_params(const FrontendParams& p, int channels, int samples);

/// Depthwise temporal convolution (same padding, shared kernel) followed by a
/// 1x1 cross-channel mix; optional tanh after the mix. Shape-preserving, and
/// linear in the input when tanh is off.
Mat spatiotemporal_filter(const FrontendParams& p, const Mat& x);

/// Sinusoidal encoding of each electrode's scaled 3-D coordinates:
/// per axis a and feature index i, sin(g_a c_a / phi_i) for even i and
/// cos(g_a c_a / phi_i) for odd i, phi_i = 10000^(2*floor(i/2)/d_enc);
/// the three axis blocks are concatenated. Output is C x (3 d_enc).
Mat geometric_position_encoding(const ElectrodeLayout& layout, int d_enc, const Vec& gains);

/// f + gpe * proj (per-channel additive time profile).
Mat inject_position(const Mat& f, const Mat& gpe, const Mat& proj);

/// n non-overlapping consecutive windows of length floor(T/n); trailing
/// samples are dropped.
std::vector<Mat> segment(const Mat& f, int n);

/// Pearson correlation of mean-centered channels. Diagonal is exactly 1.
/// Zero-variance channels raise a degenerate-channel error.
Mat correlation_state(const Mat& seg);

/// Full construction: filter -> inject position -> segment -> correlation ->
/// positive-definite projection. jitter > 0 adds seeded Gaussian noise of that
/// scale to each segment before correlation; the noise is a pure function of
/// (noise_key, segment index) so repeated calls are identical.
SpdSequence build_state_sequence(const FrontendParams& p, const ElectrodeLayout& layout,
                                 const Recording& x, double gamma, double eps,
                                 double jitter = 0.0, std::uint64_t noise_key = 0);

}  // namespace remind::frontend
