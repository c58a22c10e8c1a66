#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "remind/attention.hpp"
#include "remind/autodiff.hpp"
#include "remind/error.hpp"
#include "remind/frontend.hpp"
#include "remind/spd.hpp"
#include "test_helpers.hpp"

using namespace remind;
using remind::testing::random_matrix;
using remind::testing::random_orthogonal;
using remind::testing::random_spd;
using remind::testing::random_symmetric;

namespace {

frontend::ElectrodeLayout sphere_layout(int channels, std::uint64_t seed) {
  frontend::ElectrodeLayout layout;
  layout.coords = Mat(channels, 3);
  Rng rng(seed);
  for (int i = 0; i < channels; ++i) {
    layout.names.push_back(std::string("E") + std::to_string(i));
    Vec v = random_matrix(3, 1, rng).col(0);
    layout.coords.row(i) = v.transpose() / v.norm();
  }
  return layout;
}

/// Random parameters with O(0.3) spread so pairwise state distances are O(1)
/// and the loss surface is well conditioned for finite differences.
model::ParamSet noisy_params(const model::ModelDims& dims, std::uint64_t seed) {
  model::ParamSet p = model::init_params(dims, seed);
  Rng rng(derive_seed(seed, "noise"));
  p.frontend.temporal_kernel += 0.2 * random_matrix(dims.kernel, 1, rng).col(0);
  p.frontend.spatial += 0.2 * random_matrix(dims.channels, dims.channels, rng);
  p.frontend.gains += 0.3 * random_matrix(3, 1, rng).col(0);
  p.frontend.proj = 0.1 * random_matrix(dims.d_g(), dims.samples, rng);
  p.attention.Wq += 0.3 * random_matrix(dims.channels, dims.channels, rng);
  p.attention.Wk += 0.3 * random_matrix(dims.channels, dims.channels, rng);
  p.attention.Wv += 0.3 * random_matrix(dims.channels, dims.channels, rng);
  p.classifier.W = 0.3 * random_matrix(dims.classes, dims.d(), rng);
  p.classifier.b = 0.1 * random_matrix(dims.classes, 1, rng).col(0);
  return p;
}

std::vector<train::BatchItem> make_batch(const model::ModelDims& dims,
                                         const frontend::ElectrodeLayout& layout,
                                         const model::ParamSet& params, std::uint64_t seed,
                                         bool with_targets) {
  Rng rng(seed);
  std::vector<train::BatchItem> batch;
  for (int b = 0; b < 2; ++b) {
    train::BatchItem item;
    item.input = random_matrix(dims.channels, dims.samples, rng);
    item.label = b % dims.classes;
    item.noise_key = derive_seed(seed, "key", static_cast<std::uint64_t>(b));
    if (with_targets) {
      // Intact-state targets from a slightly different signal, fixed data.
      frontend::Recording intact;
      intact.data = item.input + 0.1 * random_matrix(dims.channels, dims.samples, rng);
      frontend::FrontendParams fp = params.frontend;
      item.targets = frontend::build_state_sequence(fp, layout, intact, dims.gamma, dims.epsilon,
                                                    0.0, item.noise_key);
      for (const Mat& t : item.targets) item.target_logs.push_back(spd::spd_log(t));
    }
    batch.push_back(std::move(item));
  }
  return batch;
}

struct GroupError {
  std::string name;
  double max_rel = 0.0;
};

/// Central finite differences for every entry of every parameter group.
std::vector<GroupError> fd_check(model::ParamSet params, const model::ModelDims& dims,
                                 const frontend::ElectrodeLayout& layout,
                                 const std::vector<train::BatchItem>& batch,
                                 const train::Objective& objective,
                                 const train::ForwardOptions& opts, double step = 1e-5) {
  model::GradSet grads = model::zeros_like(params);
  train::grad(params, dims, layout, batch, objective, opts, grads);

  std::vector<GroupError> errors;
  auto pgroups = model::param_groups(params);
  auto ggroups = model::param_groups_const(grads);
  for (std::size_t gi = 0; gi < pgroups.size(); ++gi) {
    GroupError err;
    err.name = pgroups[gi].name;
    for (Eigen::Index i = 0; i < pgroups[gi].size; ++i) {
      double saved = pgroups[gi].data[i];
      pgroups[gi].data[i] = saved + step;
      double up = train::batch_loss(params, dims, layout, batch, objective, opts);
      pgroups[gi].data[i] = saved - step;
      double down = train::batch_loss(params, dims, layout, batch, objective, opts);
      pgroups[gi].data[i] = saved;
      double fd = (up - down) / (2.0 * step);
      double ga = ggroups[gi].data[i];
      double rel = std::abs(ga - fd) / std::max({std::abs(ga), std::abs(fd), 1e-3});
      err.max_rel = std::max(err.max_rel, rel);
    }
    errors.push_back(err);
  }
  return errors;
}

model::ModelDims toy_dims() {
  model::ModelDims dims;
  dims.channels = 4;
  dims.samples = 40;
  dims.segments = 2;
  dims.d_enc = 4;
  dims.kernel = 5;
  dims.classes = 2;
  dims.hidden_mult = 2;
  return dims;
}

}  // namespace

TEST_CASE("spectral adjoint matches finite differences for the matrix log") {
  Rng rng(81);
  for (int scenario = 0; scenario < 3; ++scenario) {
    Mat a;
    if (scenario == 0) {
      a = random_spd(5, rng);  // generic spectrum
    } else {
      Mat o = random_orthogonal(4, rng);
      Vec lam(4);
      if (scenario == 1)
        lam << 0.5, 1.0, 1.0 + 1e-8, 3.0;  // near-degenerate pair
      else
        lam << 0.5, 1.0, 1.0, 3.0;  // exactly equal pair: the f' rule engages
      a = o * lam.asDiagonal() * o.transpose();
      a = (a + a.transpose()) * 0.5;
    }
    Mat r = random_symmetric(static_cast<int>(a.rows()), rng);
    Mat b = random_symmetric(static_cast<int>(a.rows()), rng);

    auto value = [&](double t) {
      return (r.cwiseProduct(spd::spd_log(Mat(a + t * b)))).sum();
    };
    spd::EigenDecomp eig = spd::sym_eigen(a);
    Mat abar = train::spectral_adjoint(eig, r, [](double x) { return std::log(x); },
                                       [](double x) { return 1.0 / x; });
    double analytic = abar.cwiseProduct(b).sum();
    double h = 1e-6;
    double fd = (value(h) - value(-h)) / (2.0 * h);
    CHECK(std::abs(analytic - fd) <= 1e-4 * std::max({1.0, std::abs(analytic), std::abs(fd)}));
  }
}

TEST_CASE("spectral adjoint matches finite differences for the matrix exp") {
  Rng rng(82);
  Mat a = random_symmetric(4, rng);
  Mat r = random_symmetric(4, rng);
  Mat b = random_symmetric(4, rng);
  auto value = [&](double t) { return (r.cwiseProduct(spd::spd_exp(Mat(a + t * b)))).sum(); };
  spd::EigenDecomp eig = spd::sym_eigen(a);
  Mat abar = train::spectral_adjoint(eig, r, [](double x) { return std::exp(x); },
                                     [](double x) { return std::exp(x); });
  double analytic = abar.cwiseProduct(b).sum();
  double h = 1e-6;
  double fd = (value(h) - value(-h)) / (2.0 * h);
  CHECK(std::abs(analytic - fd) <= 1e-4 * std::max({1.0, std::abs(analytic), std::abs(fd)}));
}

TEST_CASE("encoder forward agrees with the module-level operations") {
  model::ModelDims dims = toy_dims();
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 83);
  model::ParamSet params = noisy_params(dims, 84);
  Rng rng(85);
  Mat x = random_matrix(dims.channels, dims.samples, rng);

  train::ForwardOptions opts{0.0};
  train::EncoderTrace trace = train::forward_encoder(params, dims, layout, x, opts, 0);

  frontend::Recording rec;
  rec.data = x;
  SpdSequence states =
      frontend::build_state_sequence(params.frontend, layout, rec, dims.gamma, dims.epsilon, 0.0, 0);
  REQUIRE(states.size() == trace.states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    CHECK((states[i] - trace.states[i]).norm() <= 1e-14);

  attention::QkvSequences maps = attention::qkv(params.attention, states);
  Mat attn = attention::attention_map(maps.q, maps.k);
  CHECK((attn - trace.attn).norm() <= 1e-13);
  SpdSequence attended = attention::attend(attn, maps.v);
  SpdSequence from_trace = train::attended_states(trace);
  for (std::size_t i = 0; i < attended.size(); ++i)
    CHECK((attended[i] - from_trace[i]).norm() <= 1e-12 * (1.0 + attended[i].norm()));
}

TEST_CASE("forward_encoder is deterministic") {
  model::ModelDims dims = toy_dims();
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 86);
  model::ParamSet params = noisy_params(dims, 87);
  Rng rng(88);
  Mat x = random_matrix(dims.channels, dims.samples, rng);
  train::ForwardOptions opts{1e-8};
  train::EncoderTrace t1 = train::forward_encoder(params, dims, layout, x, opts, 5);
  train::EncoderTrace t2 = train::forward_encoder(params, dims, layout, x, opts, 5);
  for (std::size_t i = 0; i < t1.attended_log.size(); ++i)
    CHECK((t1.attended_log[i] - t2.attended_log[i]).norm() == 0.0);
}

TEST_CASE("gradients match finite differences: reconstruction, log domain") {
  model::ModelDims dims = toy_dims();
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 91);
  model::ParamSet params = noisy_params(dims, 92);
  auto batch = make_batch(dims, layout, params, 93, true);
  train::Objective objective{train::ObjectiveKind::Recon, ssl::LossDomain::Log, 1.0};
  for (const GroupError& err : fd_check(params, dims, layout, batch, objective, {0.0})) {
    INFO(err.name);
    CHECK(err.max_rel < 1e-4);
  }
}

TEST_CASE("gradients match finite differences: reconstruction, euclid domain") {
  model::ModelDims dims = toy_dims();
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 94);
  model::ParamSet params = noisy_params(dims, 95);
  auto batch = make_batch(dims, layout, params, 96, true);
  train::Objective objective{train::ObjectiveKind::Recon, ssl::LossDomain::Euclid, 1.0};
  for (const GroupError& err : fd_check(params, dims, layout, batch, objective, {0.0})) {
    INFO(err.name);
    CHECK(err.max_rel < 1e-4);
  }
}

TEST_CASE("gradients match finite differences: classification") {
  model::ModelDims dims = toy_dims();
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 97);
  model::ParamSet params = noisy_params(dims, 98);
  auto batch = make_batch(dims, layout, params, 99, false);
  train::Objective objective{train::ObjectiveKind::Classify, ssl::LossDomain::Log, 1.0};
  for (const GroupError& err : fd_check(params, dims, layout, batch, objective, {0.0})) {
    INFO(err.name);
    CHECK(err.max_rel < 1e-4);
  }
}

TEST_CASE("gradients match finite differences with tanh and jitter enabled") {
  model::ModelDims dims = toy_dims();
  dims.tanh_after_mix = true;
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 101);
  model::ParamSet params = noisy_params(dims, 102);
  params.frontend.tanh_after_mix = true;
  auto batch = make_batch(dims, layout, params, 103, true);
  train::Objective objective{train::ObjectiveKind::Recon, ssl::LossDomain::Log, 1.0};
  for (const GroupError& err : fd_check(params, dims, layout, batch, objective, {1e-8})) {
    INFO(err.name);
    CHECK(err.max_rel < 1e-4);
  }
}

TEST_CASE("gradients match finite differences through an active eigenvalue floor") {
  model::ModelDims dims = toy_dims();
  dims.gamma = 0.0;    // shrinkage off, so near-singular correlations hit the floor
  dims.epsilon = 1e-4;
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 104);
  model::ParamSet params = noisy_params(dims, 105);
  // Near-identity frontend so the near-duplication below survives filtering.
  params.frontend.proj.setZero();
  params.frontend.spatial = Mat::Identity(dims.channels, dims.channels);
  params.frontend.temporal_kernel.setZero();
  params.frontend.temporal_kernel(dims.kernel / 2) = 1.0;

  Rng rng(106);
  train::BatchItem item;
  item.input = random_matrix(dims.channels, dims.samples, rng);
  // Nearly duplicated channels: the correlation state gets an eigenvalue well
  // below the floor, but far enough from the finite-difference step.
  item.input.row(1) = item.input.row(0) + 1e-2 * random_matrix(1, dims.samples, rng);
  item.label = 0;
  item.noise_key = 1;

  // Confirm the floor branch is actually active.
  train::EncoderTrace trace = train::forward_encoder(params, dims, layout, item.input, {0.0}, 1);
  bool any_floored = false;
  for (bool f : trace.floored) any_floored = any_floored || f;
  REQUIRE(any_floored);

  frontend::Recording intact;
  intact.data = item.input + 0.05 * random_matrix(dims.channels, dims.samples, rng);
  item.targets = frontend::build_state_sequence(params.frontend, layout, intact, dims.gamma,
                                                dims.epsilon, 0.0, item.noise_key);
  for (const Mat& t : item.targets) item.target_logs.push_back(spd::spd_log(t));

  std::vector<train::BatchItem> batch{item};
  train::Objective objective{train::ObjectiveKind::Recon, ssl::LossDomain::Log, 1.0};
  for (const GroupError& err : fd_check(params, dims, layout, batch, objective, {0.0})) {
    INFO(err.name);
    CHECK(err.max_rel < 1e-4);
  }
}

TEST_CASE("objective scale is linear in the gradients") {
  model::ModelDims dims = toy_dims();
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 107);
  model::ParamSet params = noisy_params(dims, 108);
  auto batch = make_batch(dims, layout, params, 109, true);

  model::GradSet g1 = model::zeros_like(params), g2 = model::zeros_like(params);
  train::Objective base{train::ObjectiveKind::Recon, ssl::LossDomain::Log, 1.0};
  train::Objective doubled{train::ObjectiveKind::Recon, ssl::LossDomain::Log, 2.0};
  double l1 = train::grad(params, dims, layout, batch, base, {0.0}, g1);
  double l2 = train::grad(params, dims, layout, batch, doubled, {0.0}, g2);
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));

  auto a = model::param_groups_const(g1);
  auto b = model::param_groups_const(g2);
  for (std::size_t gi = 0; gi < a.size(); ++gi)
    for (Eigen::Index i = 0; i < a[gi].size; ++i)
      CHECK(std::abs(b[gi].data[i] - 2.0 * a[gi].data[i]) <=
            1e-10 * std::max(1.0, std::abs(a[gi].data[i])));
}

TEST_CASE("parameters with no path to the loss get exactly zero gradients") {
  model::ModelDims dims = toy_dims();
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 110);
  model::ParamSet params = noisy_params(dims, 111);
  auto recon_batch = make_batch(dims, layout, params, 112, true);
  auto classify_batch = make_batch(dims, layout, params, 112, false);

  model::GradSet grads = model::zeros_like(params);
  train::grad(params, dims, layout, recon_batch,
              {train::ObjectiveKind::Recon, ssl::LossDomain::Log, 1.0}, {0.0}, grads);
  CHECK(grads.classifier.W.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.classifier.b.cwiseAbs().maxCoeff() == 0.0);

  train::grad(params, dims, layout, classify_batch,
              {train::ObjectiveKind::Classify, ssl::LossDomain::Log, 1.0}, {0.0}, grads);
  CHECK(grads.recon.W1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.recon.b2.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.attention.Wq.cwiseAbs().maxCoeff() > 0.0);

  train::zero_encoder_grads(grads);
  CHECK(grads.attention.Wq.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.frontend.proj.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ablation flags remove the corresponding gradient paths") {
  model::ModelDims dims = toy_dims();
  dims.use_filters = false;
  dims.use_gpe = false;
  frontend::ElectrodeLayout layout = sphere_layout(dims.channels, 113);
  model::ParamSet params = noisy_params(dims, 114);
  auto batch = make_batch(dims, layout, params, 115, false);

  model::GradSet grads = model::zeros_like(params);
  train::grad(params, dims, layout, batch,
              {train::ObjectiveKind::Classify, ssl::LossDomain::Log, 1.0}, {0.0}, grads);
  CHECK(grads.frontend.temporal_kernel.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.frontend.spatial.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.frontend.proj.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.frontend.gains.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.attention.Wv.cwiseAbs().maxCoeff() > 0.0);
}
