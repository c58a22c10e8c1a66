#pragma once

#include <cstdint>

#include "remind/common.hpp"
#include "remind/corruption.hpp"
#include "remind/frontend.hpp"

namespace remind::ssl {

/// Dimension of the tangent vectorization, C (C + 1) / 2.
inline int tangent_dim(int channels) { return channels * (channels + 1) / 2; }

/// Flattens a symmetric matrix into a vector: the C diagonal entries first,
/// then the strict upper triangle in row-major order scaled by sqrt(2), so the
/// Euclidean norm equals the Frobenius norm. This ordering is also the
/// feature/checkpoint layout.
Vec sym_vectorize(const Mat& s);
Mat sym_devectorize(const Vec& v);

/// sym_vectorize of the matrix log; an isometry from the Log-Euclidean metric
/// to the Euclidean one.
Vec tangent_vectorize(const Mat& p);

/// Inverse: unscale, symmetrize, matrix exponential. Any finite vector maps to
/// an SPD matrix.
Mat tangent_devectorize(const Vec& v);

/// One-hidden-layer reconstruction head on tangent vectors:
/// d -> h (tanh) -> d with d = C(C+1)/2.
struct ReconHead {
  Mat W1;  // d x h
  Vec b1;  // h
  Mat W2;  // h x d
  Vec b2;  // d
};

ReconHead make_recon_head(int channels, int hidden_mult, std::uint64_t seed);

/// Maps each attended state through the head in tangent coordinates and back
/// onto the manifold. Output sequence has the same length; every output is SPD.
SpdSequence reconstruct(const ReconHead& head, const SpdSequence& attended);

enum class LossDomain { Log, Euclid };

/// Mean squared reconstruction error. Log domain: mean squared Log-Euclidean
/// distance. Euclid domain: mean squared Frobenius distance.
double recon_loss(const SpdSequence& recon, const SpdSequence& target, LossDomain domain);

struct PretrainPair {
  frontend::Recording masked;  // model input
  BoolMask mask;
  SpdSequence targets;         // states of the intact recording
};

/// Builds one self-supervised training pair: targets from the intact signal,
/// model input from the corrupted signal. The same jitter stream is used on
/// both paths, so zero corruption gives masked == intact exactly.
PretrainPair pretrain_target_and_input(const frontend::Recording& x, const corruption::CorruptionSpec& spec,
                                       const frontend::FrontendParams& params,
                                       const frontend::ElectrodeLayout& layout, double gamma, double eps,
                                       double jitter = 0.0, std::uint64_t noise_key = 0);

}  // namespace remind::ssl
