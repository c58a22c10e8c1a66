#include "remind/ssl.hpp"

#include <cmath>

#include "remind/error.hpp"
#include "remind/rng.hpp"
#include "remind/spd.hpp"

namespace remind::ssl {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

Vec sym_vectorize(const Mat& s) {
  const Eigen::Index C = s.rows();
  Vec v(tangent_dim(static_cast<int>(C)));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < C; ++i) v(k++) = s(i, i);
  for (Eigen::Index i = 0; i < C; ++i)
    for (Eigen::Index j = i + 1; j < C; ++j) v(k++) = kSqrt2 * s(i, j);
  return v;
}

Mat sym_devectorize(const Vec& v) {
  // Invert d = C(C+1)/2.
  const Eigen::Index d = v.size();
  const Eigen::Index C = static_cast<Eigen::Index>(std::lround((-1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(d))) / 2.0));
  if (C * (C + 1) / 2 != d) fail(ErrorCode::Shape, "vector length is not a triangular number");
  Mat s(C, C);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < C; ++i) s(i, i) = v(k++);
  for (Eigen::Index i = 0; i < C; ++i)
    for (Eigen::Index j = i + 1; j < C; ++j) {
      s(i, j) = s(j, i) = v(k++) / kSqrt2;
    }
  return s;
}

Vec tangent_vectorize(const Mat& p) { return sym_vectorize(spd::spd_log(p)); }

Mat tangent_devectorize(const Vec& v) { return spd::spd_exp(sym_devectorize(v)); }

ReconHead make_recon_head(int channels, int hidden_mult, std::uint64_t seed) {
  const int d = tangent_dim(channels);
  const int h = hidden_mult * d;
  ReconHead head;
  head.W1 = Mat(d, h);
  head.b1 = Vec::Zero(h);
  head.W2 = Mat(h, d);
  head.b2 = Vec::Zero(d);
  Rng rng(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < head.W1.rows(); ++i)
    for (Eigen::Index j = 0; j < head.W1.cols(); ++j) head.W1(i, j) = s1 * rng.normal();
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (Eigen::Index i = 0; i < head.W2.rows(); ++i)
    for (Eigen::Index j = 0; j < head.W2.cols(); ++j) head.W2(i, j) = s2 * rng.normal();
  return head;
}

SpdSequence reconstruct(const ReconHead& head, const SpdSequence& attended) {
  SpdSequence out;
  out.reserve(attended.size());
  for (const Mat& p : attended) {
    Vec t = tangent_vectorize(p);
    if (t.size() != head.W1.rows()) fail(ErrorCode::Shape, "head input width mismatch");
    Vec u = (head.W1.transpose() * t + head.b1).array().tanh();
    Vec r = head.W2.transpose() * u + head.b2;
    out.push_back(tangent_devectorize(r));
  }
  return out;
}

double recon_loss(const SpdSequence& recon, const SpdSequence& target, LossDomain domain) {
  if (recon.size() != target.size()) fail(ErrorCode::Shape, "sequence length mismatch in loss");
  if (recon.empty()) fail(ErrorCode::Arity, "loss of empty sequences");
  double acc = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (domain == LossDomain::Log) {
      double d = spd::le_distance(recon[i], target[i]);
      acc += d * d;
    } else {
      acc += (recon[i] - target[i]).squaredNorm();
    }
  }
  return acc / static_cast<double>(recon.size());
}

PretrainPair pretrain_target_and_input(const frontend::Recording& x, const corruption::CorruptionSpec& spec,
                                       const frontend::FrontendParams& params,
                                       const frontend::ElectrodeLayout& layout, double gamma, double eps,
                                       double jitter, std::uint64_t noise_key) {
  PretrainPair pair;
  pair.targets = frontend::build_state_sequence(params, layout, x, gamma, eps, jitter, noise_key);
  corruption::CorruptionResult res = corruption::apply(spec, x);
  pair.masked = std::move(res.corrupted);
  pair.mask = std::move(res.mask);
  return pair;
}

}  // namespace remind::ssl
