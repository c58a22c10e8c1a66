#include "remind/attention.hpp"

#include <cmath>

#include "remind/error.hpp"
#include "remind/spd.hpp"

namespace remind::attention {

void validate_attention_params(const AttentionParams& p, int dim) {
  for (const Mat* w : {&p.Wq, &p.Wk, &p.Wv}) {
    if (w->rows() != dim || w->cols() != dim) fail(ErrorCode::Shape, "attention weight must be C x C");
    if (spd::smallest_singular_value(*w) < kFullRankSigmaMin)
      fail(ErrorCode::DegenerateMap, "attention weight is rank-deficient");
  }
}

QkvSequences qkv(const AttentionParams& p, const SpdSequence& states) {
  QkvSequences out;
  out.q.reserve(states.size());
  out.k.reserve(states.size());
  out.v.reserve(states.size());
  for (const Mat& g : states) {
    out.q.push_back(spd::congruence(p.Wq, g));
    out.k.push_back(spd::congruence(p.Wk, g));
    out.v.push_back(spd::congruence(p.Wv, g));
  }
  return out;
}

double similarity_from_distance(double distance) { return 1.0 / (1.0 + std::log1p(distance)); }

double similarity(const Mat& qi, const Mat& kj) {
  return similarity_from_distance(spd::le_distance(qi, kj));
}

Mat attention_map(const SpdSequence& q, const SpdSequence& k) {
  if (q.size() != k.size()) fail(ErrorCode::Shape, "query/key sequence length mismatch");
  if (q.empty()) fail(ErrorCode::Arity, "attention over an empty sequence");
  const Eigen::Index n = static_cast<Eigen::Index>(q.size());

  SpdSequence logs_q, logs_k;
  for (const Mat& m : q) logs_q.push_back(spd::spd_log(m));
  for (const Mat& m : k) logs_k.push_back(spd::spd_log(m));

  Mat sim(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      sim(i, j) = similarity_from_distance((logs_q[static_cast<std::size_t>(i)] -
                                            logs_k[static_cast<std::size_t>(j)]).norm());

  Mat attn(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = sim.row(i).maxCoeff();
    Eigen::RowVectorXd e = (sim.row(i).array() - mx).exp();
    attn.row(i) = e / e.sum();
  }
  return attn;
}

SpdSequence attend(const Mat& attn, const SpdSequence& v) {
  if (attn.cols() != static_cast<Eigen::Index>(v.size()))
    fail(ErrorCode::Shape, "attention map width does not match value count");
  SpdSequence out;
  out.reserve(static_cast<std::size_t>(attn.rows()));
  for (Eigen::Index i = 0; i < attn.rows(); ++i)
    out.push_back(spd::weighted_le_mean(attn.row(i).transpose(), v));
  return out;
}

}  // namespace remind::attention
