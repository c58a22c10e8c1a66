#include "remind/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "remind/error.hpp"
#include "remind/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace remind::model {

void validate_dims(const ModelDims& dims) {
  if (dims.channels < 2) fail(ErrorCode::Parameter, "need at least 2 channels");
  if (dims.samples < 2) fail(ErrorCode::Parameter, "need at least 2 samples");
  if (dims.segments < 1) fail(ErrorCode::Parameter, "segment count must be positive");
  if (dims.kernel < 1 || dims.kernel % 2 == 0) fail(ErrorCode::Parameter, "kernel length must be odd");
  if (dims.d_enc <= 0 || dims.d_enc % 2 != 0) fail(ErrorCode::Parameter, "d_enc must be even and positive");
  if (dims.classes < 2) fail(ErrorCode::Parameter, "need at least 2 classes");
  if (dims.hidden_mult < 1) fail(ErrorCode::Parameter, "hidden multiplier must be positive");
  if (!(dims.gamma >= 0.0 && dims.gamma < 1.0)) fail(ErrorCode::Parameter, "shrinkage must lie in [0, 1)");
  if (dims.epsilon <= 0.0) fail(ErrorCode::Parameter, "eigenvalue floor must be positive");
  int L = dims.samples / dims.segments;
  if (L < dims.channels + 1)
    fail(ErrorCode::Parameter, "segment length " + std::to_string(L) + " below C + 1");
}

ParamSet init_params(const ModelDims& dims, std::uint64_t seed) {
  validate_dims(dims);
  ParamSet p;

  p.frontend.temporal_kernel = Vec::Zero(dims.kernel);
  p.frontend.temporal_kernel(dims.kernel / 2) = 1.0;
  p.frontend.spatial = Mat::Identity(dims.channels, dims.channels);
  p.frontend.gains = Vec::Ones(3);
  p.frontend.segments = dims.segments;
  p.frontend.tanh_after_mix = dims.tanh_after_mix;

  p.frontend.proj = Mat::Zero(dims.d_g(), dims.samples);

  Rng attn_rng(derive_seed(seed, "init-attention"));
  auto near_identity = [&attn_rng, &dims]() {
    Mat w = Mat::Identity(dims.channels, dims.channels);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) += 0.01 * attn_rng.normal();
    return w;
  };
  p.attention.Wq = near_identity();
  p.attention.Wk = near_identity();
  p.attention.Wv = near_identity();

  p.recon = ssl::make_recon_head(dims.channels, dims.hidden_mult, derive_seed(seed, "init-head"));

  p.classifier.W = Mat::Zero(dims.classes, dims.d());
  p.classifier.b = Vec::Zero(dims.classes);
  return p;
}

ParamSet zeros_like(const ParamSet& p) {
  ParamSet z = p;
  for (auto& g : param_groups(z)) std::memset(g.data, 0, sizeof(double) * static_cast<std::size_t>(g.size));
  z.frontend.segments = p.frontend.segments;
  z.frontend.tanh_after_mix = p.frontend.tanh_after_mix;
  return z;
}

std::vector<ParamGroup> param_groups(ParamSet& p) {
  std::vector<ParamGroup> groups;
  auto add = [&groups](const std::string& name, double* data, Eigen::Index size, bool encoder) {
    groups.push_back({name, data, size, encoder});
  };
  add("temporal_kernel", p.frontend.temporal_kernel.data(), p.frontend.temporal_kernel.size(), true);
  add("spatial", p.frontend.spatial.data(), p.frontend.spatial.size(), true);
  add("gains", p.frontend.gains.data(), p.frontend.gains.size(), true);
  add("proj", p.frontend.proj.data(), p.frontend.proj.size(), true);
  add("Wq", p.attention.Wq.data(), p.attention.Wq.size(), true);
  add("Wk", p.attention.Wk.data(), p.attention.Wk.size(), true);
  add("Wv", p.attention.Wv.data(), p.attention.Wv.size(), true);
  add("head_W1", p.recon.W1.data(), p.recon.W1.size(), true);
  add("head_b1", p.recon.b1.data(), p.recon.b1.size(), true);
  add("head_W2", p.recon.W2.data(), p.recon.W2.size(), true);
  add("head_b2", p.recon.b2.data(), p.recon.b2.size(), true);
  add("classifier_W", p.classifier.W.data(), p.classifier.W.size(), false);
  add("classifier_b", p.classifier.b.data(), p.classifier.b.size(), false);
  return groups;
}

std::vector<ParamGroup> param_groups_const(const ParamSet& p) {
  return param_groups(const_cast<ParamSet&>(p));
}

bool all_finite(const ParamSet& p) {
  for (const auto& g : param_groups_const(p))
    for (Eigen::Index i = 0; i < g.size; ++i)
      if (!std::isfinite(g.data[i])) return false;
  return true;
}

namespace {

constexpr char kMagic[4] = {'R', 'M', 'N', 'D'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

double read_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelDims& dims, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(dims.channels));
  write_u32(out, static_cast<std::uint32_t>(dims.samples));
  write_u32(out, static_cast<std::uint32_t>(dims.segments));
  write_u32(out, static_cast<std::uint32_t>(dims.d_enc));
  write_u32(out, static_cast<std::uint32_t>(dims.kernel));
  write_u32(out, static_cast<std::uint32_t>(dims.classes));
  write_u32(out, static_cast<std::uint32_t>(dims.hidden_mult));
  std::uint32_t flags = 0;
  if (dims.tanh_after_mix) flags |= 1u;
  if (dims.use_filters) flags |= 2u;
  if (dims.use_gpe) flags |= 4u;
  write_u32(out, flags);
  write_f64(out, dims.gamma);
  write_f64(out, dims.epsilon);
  for (const auto& g : param_groups_const(params))
    out.write(reinterpret_cast<const char*>(g.data), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(g.size)));
  if (!out) fail(ErrorCode::Io, "checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorCode::Data, "bad checkpoint magic in " + path);
  std::uint32_t version = read_u32(in);
  if (version != kVersion) fail(ErrorCode::Data, "unsupported checkpoint version " + std::to_string(version));

  ModelDims dims;
  dims.channels = static_cast<int>(read_u32(in));
  dims.samples = static_cast<int>(read_u32(in));
  dims.segments = static_cast<int>(read_u32(in));
  dims.d_enc = static_cast<int>(read_u32(in));
  dims.kernel = static_cast<int>(read_u32(in));
  dims.classes = static_cast<int>(read_u32(in));
  dims.hidden_mult = static_cast<int>(read_u32(in));
  std::uint32_t flags = read_u32(in);
  dims.tanh_after_mix = (flags & 1u) != 0;
  dims.use_filters = (flags & 2u) != 0;
  dims.use_gpe = (flags & 4u) != 0;
  dims.gamma = read_f64(in);
  dims.epsilon = read_f64(in);
  if (!in) fail(ErrorCode::Data, "truncated checkpoint header in " + path);
  validate_dims(dims);

  Checkpoint cp{dims, init_params(dims, 0)};
  for (auto& g : param_groups(cp.params)) {
    in.read(reinterpret_cast<char*>(g.data), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(g.size)));
    if (!in) fail(ErrorCode::Data, "truncated checkpoint payload in " + path);
  }
  char extra = 0;
  if (in.read(&extra, 1)) fail(ErrorCode::Data, "trailing bytes in checkpoint " + path);
  if (!all_finite(cp.params)) fail(ErrorCode::Data, "non-finite parameter in checkpoint " + path);
  return cp;
}

}  // namespace remind::model
