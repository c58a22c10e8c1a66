#pragma once

#include "remind/common.hpp"

namespace remind::attention {

/// Bilinear projection weights. Each must be full rank so that the congruence
/// maps preserve positive-definiteness.
struct AttentionParams {
  Mat Wq, Wk, Wv;
};

void validate_attention_params(const AttentionParams& p, int dim);

struct QkvSequences {
  SpdSequence q, k, v;
};

/// Q_i = Wq G_i Wq^T (and likewise K, V). All outputs stay SPD.
QkvSequences qkv(const AttentionParams& p, const SpdSequence& states);

/// 1 / (1 + ln(1 + LE-distance)). Equals 1 iff the distance is 0; strictly
/// decreasing in the distance, always in (0, 1].
double similarity(const Mat& qi, const Mat& kj);

double similarity_from_distance(double distance);

/// Row-softmax of the pairwise similarity matrix; every row sums to 1.
Mat attention_map(const SpdSequence& q, const SpdSequence& k);

/// Attended states: each output is the weighted Log-Euclidean mean of the
/// value sequence under one attention row.
SpdSequence attend(const Mat& attn, const SpdSequence& v);

}  // namespace remind::attention
