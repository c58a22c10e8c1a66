#include "remind/autodiff.hpp"

#include <cmath>

#include "remind/error.hpp"
#include "remind/rng.hpp"

namespace remind::train {

namespace {

constexpr double kEqualEigGap = 1e-10;

Mat symmetrize(const Mat& m) { return (m + m.transpose()) * 0.5; }

Mat spectral_forward(const spd::EigenDecomp& eig, const std::function<double(double)>& f) {
  Vec fv = eig.eigenvalues.unaryExpr([&f](double x) { return f(x); });
  Mat m = eig.eigenvectors * fv.asDiagonal() * eig.eigenvectors.transpose();
  return symmetrize(m);
}

double log_fn(double x) { return std::log(x); }
double inv_fn(double x) { return 1.0 / x; }

}  // namespace

Mat spectral_adjoint(const spd::EigenDecomp& eig, const Mat& gbar,
                     const std::function<double(double)>& f,
                     const std::function<double(double)>& fprime) {
  const Mat& vecs = eig.eigenvectors;
  const Vec& lam = eig.eigenvalues;
  const Eigen::Index n = lam.size();
  Mat g = vecs.transpose() * gbar * vecs;
  Mat k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double gap = lam(i) - lam(j);
      k(i, j) = std::abs(gap) < kEqualEigGap ? fprime(lam(i)) : (f(lam(i)) - f(lam(j))) / gap;
    }
  return vecs * k.cwiseProduct(g) * vecs.transpose();
}

EncoderTrace forward_encoder(const ParamSet& params, const ModelDims& dims,
                             const frontend::ElectrodeLayout& layout, const Mat& x,
                             const ForwardOptions& opts, std::uint64_t noise_key) {
  const Eigen::Index C = dims.channels, T = dims.samples;
  if (x.rows() != C || x.cols() != T) fail(ErrorCode::Shape, "recording does not match model dims");
  if (layout.channels() != dims.channels) fail(ErrorCode::Shape, "layout does not match model dims");
  if (!x.allFinite()) fail(ErrorCode::Numeric, "non-finite input sample");

  EncoderTrace tr;
  tr.noise_key = noise_key;
  tr.x = x;

  // Spatiotemporal filters (same arithmetic as frontend::spatiotemporal_filter).
  const Mat* stage = &tr.x;
  if (dims.use_filters) {
    const Eigen::Index kt = params.frontend.temporal_kernel.size();
    const Eigen::Index half = kt / 2;
    tr.conv_out = Mat::Zero(C, T);
    for (Eigen::Index c = 0; c < C; ++c)
      for (Eigen::Index t = 0; t < T; ++t) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < kt; ++k) {
          Eigen::Index src = t + k - half;
          if (src >= 0 && src < T) acc += params.frontend.temporal_kernel(k) * x(c, src);
        }
        tr.conv_out(c, t) = acc;
      }
    tr.mix_out = params.frontend.spatial * tr.conv_out;
    tr.post_nonlin = dims.tanh_after_mix ? Mat(tr.mix_out.array().tanh().matrix()) : tr.mix_out;
    stage = &tr.post_nonlin;
  }

  if (dims.use_gpe) {
    tr.gpe = frontend::geometric_position_encoding(layout, dims.d_enc, params.frontend.gains);
    tr.features = *stage + tr.gpe * params.frontend.proj;
  } else {
    tr.features = *stage;
  }

  // Segmentation + jitter + correlation states.
  const int n = dims.segments;
  tr.seg_len = static_cast<int>(T) / n;
  const Eigen::Index L = tr.seg_len;
  if (L < C + 1) fail(ErrorCode::Parameter, "segment length below C + 1");

  for (int m = 0; m < n; ++m) {
    Mat seg = tr.features.middleCols(static_cast<Eigen::Index>(m) * L, L);
    if (opts.jitter > 0.0) {
      Rng rng(derive_seed(noise_key, "jitter", static_cast<std::uint64_t>(m)));
      for (Eigen::Index i = 0; i < C; ++i)
        for (Eigen::Index t = 0; t < L; ++t) seg(i, t) += opts.jitter * rng.normal();
    }
    tr.segments.push_back(seg);

    Mat centered(C, L);
    Vec norms(C);
    for (Eigen::Index i = 0; i < C; ++i) {
      double mean = seg.row(i).mean();
      centered.row(i) = seg.row(i).array() - mean;
      norms(i) = centered.row(i).norm();
      double scale = seg.row(i).cwiseAbs().maxCoeff();
      if (norms(i) <= 1e-12 * std::sqrt(static_cast<double>(L)) * (1.0 + scale))
        fail(ErrorCode::DegenerateChannel,
             "channel " + std::to_string(i) + " has zero variance in segment " + std::to_string(m));
    }
    Mat corr = Mat::Identity(C, C);
    BoolMask clamped = BoolMask::Constant(C, C, false);
    for (Eigen::Index i = 0; i < C; ++i)
      for (Eigen::Index j = i + 1; j < C; ++j) {
        double r = centered.row(i).dot(centered.row(j)) / (norms(i) * norms(j));
        if (r > 1.0) {
          r = 1.0;
          clamped(i, j) = true;
        }
        if (r < -1.0) {
          r = -1.0;
          clamped(i, j) = true;
        }
        corr(i, j) = corr(j, i) = r;
      }
    tr.centered.push_back(std::move(centered));
    tr.norms.push_back(std::move(norms));
    tr.corr.push_back(corr);
    tr.clamped.push_back(std::move(clamped));

    // Positive-definite projection (same arithmetic as spd::to_spd).
    Mat shrunk = dims.gamma == 0.0
                     ? tr.corr.back()
                     : Mat((1.0 - dims.gamma) * tr.corr.back() + dims.gamma * Mat::Identity(C, C));
    spd::EigenDecomp eig = spd::sym_eigen(shrunk);
    bool floored = eig.eigenvalues(0) <= dims.epsilon;
    Mat state;
    if (floored) {
      Vec lam = eig.eigenvalues.cwiseMax(dims.epsilon);
      Mat m2 = eig.eigenvectors * lam.asDiagonal() * eig.eigenvectors.transpose();
      state = symmetrize(m2);
    } else {
      state = shrunk;
    }
    tr.shrunk.push_back(std::move(shrunk));
    tr.eig_shrunk.push_back(std::move(eig));
    tr.floored.push_back(floored);
    tr.states.push_back(std::move(state));
  }

  // Bilinear QKV maps; reject degenerate weights once per forward.
  for (const Mat* w : {&params.attention.Wq, &params.attention.Wk, &params.attention.Wv})
    if (spd::smallest_singular_value(*w) < kFullRankSigmaMin)
      fail(ErrorCode::DegenerateMap, "attention weight is rank-deficient");

  for (int m = 0; m < n; ++m) {
    tr.Q.push_back(symmetrize(params.attention.Wq * tr.states[static_cast<std::size_t>(m)] *
                              params.attention.Wq.transpose()));
    tr.K.push_back(symmetrize(params.attention.Wk * tr.states[static_cast<std::size_t>(m)] *
                              params.attention.Wk.transpose()));
    tr.V.push_back(symmetrize(params.attention.Wv * tr.states[static_cast<std::size_t>(m)] *
                              params.attention.Wv.transpose()));
  }

  auto take_log = [](const Mat& p, std::vector<spd::EigenDecomp>& eigs, std::vector<Mat>& logs) {
    spd::EigenDecomp eig = spd::sym_eigen(p);
    if (eig.eigenvalues(0) <= 0.0)
      fail(ErrorCode::NotPositiveDefinite, "projected state lost positive-definiteness");
    logs.push_back(spectral_forward(eig, log_fn));
    eigs.push_back(std::move(eig));
  };
  for (int m = 0; m < n; ++m) {
    take_log(tr.Q[static_cast<std::size_t>(m)], tr.eig_q, tr.log_q);
    take_log(tr.K[static_cast<std::size_t>(m)], tr.eig_k, tr.log_k);
    take_log(tr.V[static_cast<std::size_t>(m)], tr.eig_v, tr.log_v);
  }

  tr.dist = Mat(n, n);
  tr.sim = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d = (tr.log_q[static_cast<std::size_t>(i)] - tr.log_k[static_cast<std::size_t>(j)]).norm();
      tr.dist(i, j) = d;
      tr.sim(i, j) = 1.0 / (1.0 + std::log1p(d));
    }

  tr.attn = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    double mx = tr.sim.row(i).maxCoeff();
    Eigen::RowVectorXd e = (tr.sim.row(i).array() - mx).exp();
    tr.attn.row(i) = e / e.sum();
  }

  for (int i = 0; i < n; ++i) {
    Mat acc = Mat::Zero(C, C);
    for (int j = 0; j < n; ++j) acc += tr.attn(i, j) * tr.log_v[static_cast<std::size_t>(j)];
    tr.attended_log.push_back(std::move(acc));
  }
  return tr;
}

SpdSequence attended_states(const EncoderTrace& trace) {
  SpdSequence out;
  out.reserve(trace.attended_log.size());
  for (const Mat& lv : trace.attended_log) out.push_back(spd::spd_exp(lv));
  return out;
}

void backward_encoder(const EncoderTrace& tr, const ParamSet& params, const ModelDims& dims,
                      const frontend::ElectrodeLayout& layout,
                      const std::vector<Mat>& attended_log_bar, GradSet& grads) {
  const Eigen::Index C = dims.channels, T = dims.samples;
  const int n = dims.segments;
  const Eigen::Index L = tr.seg_len;

  // Attended mean -> attention map and value logs.
  Mat attn_bar = Mat::Zero(n, n);
  std::vector<Mat> log_v_bar(static_cast<std::size_t>(n), Mat::Zero(C, C));
  for (int i = 0; i < n; ++i) {
    const Mat& ab = attended_log_bar[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      attn_bar(i, j) = ab.cwiseProduct(tr.log_v[static_cast<std::size_t>(j)]).sum();
      log_v_bar[static_cast<std::size_t>(j)] += tr.attn(i, j) * ab;
    }
  }

  // Row softmax.
  Mat sim_bar(n, n);
  for (int i = 0; i < n; ++i) {
    double dot = attn_bar.row(i).dot(tr.attn.row(i));
    for (int j = 0; j < n; ++j) sim_bar(i, j) = tr.attn(i, j) * (attn_bar(i, j) - dot);
  }

  // Similarity -> distance -> query/key logs.
  std::vector<Mat> log_q_bar(static_cast<std::size_t>(n), Mat::Zero(C, C));
  std::vector<Mat> log_k_bar(static_cast<std::size_t>(n), Mat::Zero(C, C));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d = tr.dist(i, j);
      double s = tr.sim(i, j);
      double d_bar = sim_bar(i, j) * (-s * s / (1.0 + d));
      if (d <= 0.0) continue;  // distance not differentiable at 0; subgradient 0
      Mat dir = (tr.log_q[static_cast<std::size_t>(i)] - tr.log_k[static_cast<std::size_t>(j)]) / d;
      log_q_bar[static_cast<std::size_t>(i)] += d_bar * dir;
      log_k_bar[static_cast<std::size_t>(j)] -= d_bar * dir;
    }

  // Matrix logs -> Q/K/V, then congruences -> weights and states.
  std::vector<Mat> state_bar(static_cast<std::size_t>(n), Mat::Zero(C, C));
  auto log_backward = [](const spd::EigenDecomp& eig, const Mat& lbar) {
    return symmetrize(spectral_adjoint(eig, symmetrize(lbar), log_fn, inv_fn));
  };
  for (int m = 0; m < n; ++m) {
    const std::size_t um = static_cast<std::size_t>(m);
    Mat q_bar = log_backward(tr.eig_q[um], log_q_bar[um]);
    Mat k_bar = log_backward(tr.eig_k[um], log_k_bar[um]);
    Mat v_bar = log_backward(tr.eig_v[um], log_v_bar[um]);

    const Mat& g = tr.states[um];
    Mat mq = symmetrize(q_bar), mk = symmetrize(k_bar), mv = symmetrize(v_bar);
    grads.attention.Wq += (mq + mq.transpose()) * params.attention.Wq * g;
    grads.attention.Wk += (mk + mk.transpose()) * params.attention.Wk * g;
    grads.attention.Wv += (mv + mv.transpose()) * params.attention.Wv * g;
    state_bar[um] += params.attention.Wq.transpose() * mq * params.attention.Wq +
                     params.attention.Wk.transpose() * mk * params.attention.Wk +
                     params.attention.Wv.transpose() * mv * params.attention.Wv;
  }

  // Positive-definite projection -> correlation -> centered segments -> features.
  Mat features_bar = Mat::Zero(C, T);
  const double shrink_scale = 1.0 - dims.gamma;
  for (int m = 0; m < n; ++m) {
    const std::size_t um = static_cast<std::size_t>(m);
    Mat shrunk_bar;
    if (tr.floored[um]) {
      const double eps = dims.epsilon;
      Mat gb = symmetrize(state_bar[um]);
      shrunk_bar = symmetrize(spectral_adjoint(
          tr.eig_shrunk[um], gb, [eps](double x) { return std::max(x, eps); },
          [eps](double x) { return x > eps ? 1.0 : 0.0; }));
    } else {
      shrunk_bar = state_bar[um];
    }
    Mat corr_bar = shrink_scale * shrunk_bar;

    const Mat& centered = tr.centered[um];
    const Vec& norms = tr.norms[um];
    const Mat& corr = tr.corr[um];
    Mat centered_bar = Mat::Zero(C, L);
    for (Eigen::Index i = 0; i < C; ++i)
      for (Eigen::Index j = i + 1; j < C; ++j) {
        if (tr.clamped[um](i, j)) continue;
        double gsum = corr_bar(i, j) + corr_bar(j, i);
        if (gsum == 0.0) continue;
        double r = corr(i, j);
        double nij = norms(i) * norms(j);
        centered_bar.row(i) += gsum * (centered.row(j) / nij - r * centered.row(i) / (norms(i) * norms(i)));
        centered_bar.row(j) += gsum * (centered.row(i) / nij - r * centered.row(j) / (norms(j) * norms(j)));
      }

    // Centering adjoint, then scatter into the feature window (jitter is additive).
    for (Eigen::Index i = 0; i < C; ++i) {
      double mean = centered_bar.row(i).mean();
      features_bar.row(i).segment(static_cast<Eigen::Index>(m) * L, L) +=
          (centered_bar.row(i).array() - mean).matrix();
    }
  }

  // Positional injection.
  const Mat* stage_bar = &features_bar;
  Mat post_nonlin_bar;
  if (dims.use_gpe) {
    grads.frontend.proj += tr.gpe.transpose() * features_bar;
    Mat gpe_bar = features_bar * params.frontend.proj.transpose();
    for (Eigen::Index s = 0; s < C; ++s)
      for (int axis = 0; axis < 3; ++axis) {
        double coord = layout.coords(s, axis);
        for (int i = 0; i < dims.d_enc; ++i) {
          double phi = std::pow(10000.0, 2.0 * (i / 2) / static_cast<double>(dims.d_enc));
          double arg = params.frontend.gains(axis) * coord / phi;
          double deriv = (i % 2 == 0 ? std::cos(arg) : -std::sin(arg)) * coord / phi;
          grads.frontend.gains(axis) += gpe_bar(s, axis * dims.d_enc + i) * deriv;
        }
      }
  }

  if (!dims.use_filters) return;  // input has no parameters upstream

  if (dims.tanh_after_mix) {
    post_nonlin_bar = stage_bar->cwiseProduct(
        (Mat::Ones(C, T) - tr.post_nonlin.cwiseProduct(tr.post_nonlin)));
    stage_bar = &post_nonlin_bar;
  }

  grads.frontend.spatial += *stage_bar * tr.conv_out.transpose();
  Mat conv_bar = params.frontend.spatial.transpose() * (*stage_bar);

  const Eigen::Index kt = params.frontend.temporal_kernel.size();
  const Eigen::Index half = kt / 2;
  for (Eigen::Index k = 0; k < kt; ++k) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      Eigen::Index src = t + k - half;
      if (src >= 0 && src < T) acc += conv_bar.col(t).dot(tr.x.col(src));
    }
    grads.frontend.temporal_kernel(k) += acc;
  }
}

namespace {

struct ItemEval {
  double loss = 0.0;
  EncoderTrace trace;
  std::vector<Vec> tangent;          // sym_vectorize of attended logs
  std::vector<Vec> hidden;           // tanh activations (recon)
  std::vector<Vec> out;              // head outputs (recon)
  std::vector<spd::EigenDecomp> eig_recon;  // euclid domain only
  std::vector<Mat> recon_states;            // euclid domain only
  Vec pooled;                        // classify
  Vec probs;                         // classify
};

ItemEval eval_item(const ParamSet& params, const ModelDims& dims,
                   const frontend::ElectrodeLayout& layout, const BatchItem& item,
                   const Objective& objective, const ForwardOptions& opts) {
  ItemEval ev;
  ev.trace = forward_encoder(params, dims, layout, item.input, opts, item.noise_key);
  const int n = dims.segments;
  for (int i = 0; i < n; ++i)
    ev.tangent.push_back(ssl::sym_vectorize(ev.trace.attended_log[static_cast<std::size_t>(i)]));

  if (objective.kind == ObjectiveKind::Recon) {
    if (item.target_logs.size() != static_cast<std::size_t>(n))
      fail(ErrorCode::Shape, "target sequence length mismatch");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      Vec z = params.recon.W1.transpose() * ev.tangent[ui] + params.recon.b1;
      Vec u = z.array().tanh();
      Vec r = params.recon.W2.transpose() * u + params.recon.b2;
      ev.hidden.push_back(std::move(u));
      if (objective.domain == ssl::LossDomain::Log) {
        // |exp^-1(recon) - log target|_F^2 in tangent coordinates (isometry).
        acc += (r - ssl::sym_vectorize(item.target_logs[ui])).squaredNorm();
      } else {
        spd::EigenDecomp eig = spd::sym_eigen(ssl::sym_devectorize(r));
        Mat recon_state = spectral_forward(eig, [](double x) { return std::exp(x); });
        acc += (recon_state - item.targets[ui]).squaredNorm();
        ev.eig_recon.push_back(std::move(eig));
        ev.recon_states.push_back(std::move(recon_state));
      }
      ev.out.push_back(std::move(r));
    }
    ev.loss = acc / static_cast<double>(n);
  } else {
    if (item.label < 0 || item.label >= dims.classes)
      fail(ErrorCode::Data, "classify objective needs a valid label");
    Vec pooled = Vec::Zero(dims.d());
    for (const Vec& t : ev.tangent) pooled += t;
    pooled /= static_cast<double>(n);
    Vec logits = params.classifier.W * pooled + params.classifier.b;
    double mx = logits.maxCoeff();
    Vec e = (logits.array() - mx).exp();
    ev.probs = e / e.sum();
    ev.pooled = std::move(pooled);
    ev.loss = -std::log(ev.probs(item.label));
  }
  return ev;
}

void backward_item(const ParamSet& params, const ModelDims& dims,
                   const frontend::ElectrodeLayout& layout, const BatchItem& item,
                   const Objective& objective, ItemEval& ev, double weight, GradSet& grads) {
  const int n = dims.segments;
  std::vector<Vec> tangent_bar(static_cast<std::size_t>(n));

  if (objective.kind == ObjectiveKind::Recon) {
    const double per_state = weight * 2.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      Vec r_bar;
      if (objective.domain == ssl::LossDomain::Log) {
        r_bar = per_state * (ev.out[ui] - ssl::sym_vectorize(item.target_logs[ui]));
      } else {
        Mat state_bar = per_state * (ev.recon_states[ui] - item.targets[ui]);
        Mat m_bar = symmetrize(spectral_adjoint(
            ev.eig_recon[ui], symmetrize(state_bar), [](double x) { return std::exp(x); },
            [](double x) { return std::exp(x); }));
        // Adjoint of sym_devectorize: both mirrored entries feed one coordinate.
        const Eigen::Index C = dims.channels;
        r_bar = Vec(dims.d());
        Eigen::Index k = 0;
        for (Eigen::Index a = 0; a < C; ++a) r_bar(k++) = m_bar(a, a);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (Eigen::Index a = 0; a < C; ++a)
          for (Eigen::Index b = a + 1; b < C; ++b) r_bar(k++) = (m_bar(a, b) + m_bar(b, a)) * inv_sqrt2;
      }
      grads.recon.b2 += r_bar;
      grads.recon.W2 += ev.hidden[ui] * r_bar.transpose();
      Vec u_bar = params.recon.W2 * r_bar;
      Vec z_bar = u_bar.array() * (1.0 - ev.hidden[ui].array().square());
      grads.recon.b1 += z_bar;
      grads.recon.W1 += ev.tangent[ui] * z_bar.transpose();
      tangent_bar[ui] = params.recon.W1 * z_bar;
    }
  } else {
    Vec logits_bar = ev.probs;
    logits_bar(item.label) -= 1.0;
    logits_bar *= weight;
    grads.classifier.W += logits_bar * ev.pooled.transpose();
    grads.classifier.b += logits_bar;
    Vec pooled_bar = params.classifier.W.transpose() * logits_bar / static_cast<double>(n);
    for (int i = 0; i < n; ++i) tangent_bar[static_cast<std::size_t>(i)] = pooled_bar;
  }

  // Adjoint of sym_vectorize: diagonal then sqrt(2)-scaled upper triangle.
  const Eigen::Index C = dims.channels;
  const double sqrt2 = std::sqrt(2.0);
  std::vector<Mat> attended_bar;
  attended_bar.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Vec& tb = tangent_bar[static_cast<std::size_t>(i)];
    Mat ab = Mat::Zero(C, C);
    Eigen::Index k = 0;
    for (Eigen::Index a = 0; a < C; ++a) ab(a, a) = tb(k++);
    for (Eigen::Index a = 0; a < C; ++a)
      for (Eigen::Index b = a + 1; b < C; ++b) ab(a, b) = sqrt2 * tb(k++);
    attended_bar.push_back(std::move(ab));
  }
  backward_encoder(ev.trace, params, dims, layout, attended_bar, grads);
}

}  // namespace

double batch_loss(const ParamSet& params, const ModelDims& dims,
                  const frontend::ElectrodeLayout& layout, const std::vector<BatchItem>& batch,
                  const Objective& objective, const ForwardOptions& opts) {
  if (batch.empty()) fail(ErrorCode::Arity, "empty batch");
  double total = 0.0;
  for (const BatchItem& item : batch)
    total += eval_item(params, dims, layout, item, objective, opts).loss;
  double loss = objective.loss_scale * total / static_cast<double>(batch.size());
  if (!std::isfinite(loss)) fail(ErrorCode::Numeric, "non-finite loss");
  return loss;
}

double grad(const ParamSet& params, const ModelDims& dims, const frontend::ElectrodeLayout& layout,
            const std::vector<BatchItem>& batch, const Objective& objective,
            const ForwardOptions& opts, GradSet& grads) {
  if (batch.empty()) fail(ErrorCode::Arity, "empty batch");
  for (auto& g : model::param_groups(grads))
    for (Eigen::Index i = 0; i < g.size; ++i) g.data[i] = 0.0;
  const double weight = objective.loss_scale / static_cast<double>(batch.size());
  double total = 0.0;
  for (const BatchItem& item : batch) {
    ItemEval ev = eval_item(params, dims, layout, item, objective, opts);
    total += ev.loss;
    backward_item(params, dims, layout, item, objective, ev, weight, grads);
  }
  double loss = objective.loss_scale * total / static_cast<double>(batch.size());
  if (!std::isfinite(loss)) fail(ErrorCode::Numeric, "non-finite loss");
  for (const auto& g : model::param_groups(grads))
    for (Eigen::Index i = 0; i < g.size; ++i)
      if (!std::isfinite(g.data[i]))
        fail(ErrorCode::Numeric, "non-finite gradient in group " + g.name);
  return loss;
}

void zero_encoder_grads(GradSet& grads) {
  for (auto& g : model::param_groups(grads))
    if (g.encoder)
      for (Eigen::Index i = 0; i < g.size; ++i) g.data[i] = 0.0;
}

}  // namespace remind::train
