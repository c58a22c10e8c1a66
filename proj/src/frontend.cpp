#include "remind/frontend.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "remind/rng.hpp"
#include "remind/spd.hpp"

namespace remind::frontend {

void validate_layout(const ElectrodeLayout& layout) {
  if (layout.coords.rows() != static_cast<Eigen::Index>(layout.names.size()) || layout.coords.cols() != 3)
    fail(ErrorCode::Shape, "layout coordinates must be C x 3 with one name per row");
  std::set<std::string> seen;
  for (const auto& name : layout.names) {
    if (name.empty()) fail(ErrorCode::Data, "empty electrode name");
    if (!seen.insert(name).second) fail(ErrorCode::Data, "duplicate electrode name: " + name);
  }
  for (Eigen::Index i = 0; i < layout.coords.rows(); ++i) {
    double r = layout.coords.row(i).norm();
    if (r < 0.5 || r > 1.5)
      fail(ErrorCode::Data, "electrode " + layout.names[static_cast<std::size_t>(i)] +
                                " has coordinate norm " + std::to_string(r) + " outside [0.5, 1.5]");
  }
}

ElectrodeLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open layout file: " + path);

  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Data, "layout file is empty: " + path);
  if (line != "name,x,y,z") fail(ErrorCode::Data, "layout header must be 'name,x,y,z'");

  std::vector<std::string> names;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 4) fail(ErrorCode::Data, "layout row needs 4 fields: " + line);
    names.push_back(fields[0]);
    for (int k = 1; k <= 3; ++k) {
      try {
        values.push_back(std::stod(fields[static_cast<std::size_t>(k)]));
      } catch (const std::exception&) {
        fail(ErrorCode::Data, "bad coordinate in layout row: " + line);
      }
    }
  }
  ElectrodeLayout layout;
  layout.names = std::move(names);
  layout.coords = Mat(static_cast<Eigen::Index>(layout.names.size()), 3);
  for (Eigen::Index i = 0; i < layout.coords.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      layout.coords(i, j) = values[static_cast<std::size_t>(3 * i + j)];
  validate_layout(layout);
  return layout;
}

void save_layout(const ElectrodeLayout& layout, const std::string& path) {
  validate_layout(layout);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write layout file: " + path);
  out << "name,x,y,z\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < layout.coords.rows(); ++i)
    out << layout.names[static_cast<std::size_t>(i)] << ',' << layout.coords(i, 0) << ','
        << layout.coords(i, 1) << ',' << layout.coords(i, 2) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

void validate_frontend_params(const FrontendParams& p, int channels, int samples) {
  if (p.temporal_kernel.size() % 2 == 0 || p.temporal_kernel.size() < 1)
    fail(ErrorCode::Parameter, "temporal kernel length must be odd");
  if (p.spatial.rows() != channels || p.spatial.cols() != channels)
    fail(ErrorCode::Shape, "spatial mix must be C x C");
  if (p.gains.size() != 3) fail(ErrorCode::Shape, "three per-axis gains expected");
  if (p.proj.cols() != samples) fail(ErrorCode::Shape, "positional projection must have T columns");
  if (p.segments < 1) fail(ErrorCode::Parameter, "segment count must be positive");
  int L = samples / p.segments;
  if (L < channels + 1)
    fail(ErrorCode::Parameter, "segment length " + std::to_string(L) + " below C + 1");
}

Mat spatiotemporal_filter(const FrontendParams& p, const Mat& x) {
  const Eigen::Index C = x.rows(), T = x.cols();
  const Eigen::Index kt = p.temporal_kernel.size();
  if (kt % 2 == 0 || kt < 1) fail(ErrorCode::Parameter, "temporal kernel length must be odd");
  if (p.spatial.rows() != C || p.spatial.cols() != C) fail(ErrorCode::Shape, "spatial mix must be C x C");
  const Eigen::Index half = kt / 2;

  Mat h1 = Mat::Zero(C, T);
  for (Eigen::Index c = 0; c < C; ++c)
    for (Eigen::Index t = 0; t < T; ++t) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < kt; ++k) {
        Eigen::Index src = t + k - half;
        if (src >= 0 && src < T) acc += p.temporal_kernel(k) * x(c, src);
      }
      h1(c, t) = acc;
    }

  Mat h2 = p.spatial * h1;
  if (p.tanh_after_mix) return h2.array().tanh().matrix();
  return h2;
}

Mat geometric_position_encoding(const ElectrodeLayout& layout, int d_enc, const Vec& gains) {
  if (d_enc <= 0 || d_enc % 2 != 0) fail(ErrorCode::Parameter, "encoding width must be even and positive");
  if (gains.size() != 3) fail(ErrorCode::Shape, "three per-axis gains expected");
  const Eigen::Index C = layout.coords.rows();
  Mat gpe(C, 3 * d_enc);
  for (Eigen::Index s = 0; s < C; ++s)
    for (int axis = 0; axis < 3; ++axis) {
      double m = gains(axis) * layout.coords(s, axis);
      for (int i = 0; i < d_enc; ++i) {
        double phi = std::pow(10000.0, 2.0 * (i / 2) / static_cast<double>(d_enc));
        double arg = m / phi;
        gpe(s, axis * d_enc + i) = (i % 2 == 0) ? std::sin(arg) : std::cos(arg);
      }
    }
  return gpe;
}

Mat inject_position(const Mat& f, const Mat& gpe, const Mat& proj) {
  if (gpe.rows() != f.rows() || gpe.cols() != proj.rows() || proj.cols() != f.cols())
    fail(ErrorCode::Shape, "positional injection shapes are inconsistent");
  return f + gpe * proj;
}

std::vector<Mat> segment(const Mat& f, int n) {
  if (n < 1) fail(ErrorCode::Parameter, "segment count must be positive");
  const Eigen::Index L = f.cols() / n;
  if (L < 2) fail(ErrorCode::Segmentation, "segment length below 2");
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) out.push_back(f.middleCols(static_cast<Eigen::Index>(m) * L, L));
  return out;
}

Mat correlation_state(const Mat& seg) {
  const Eigen::Index C = seg.rows(), L = seg.cols();
  if (L < 2) fail(ErrorCode::Segmentation, "correlation needs at least 2 samples");

  Mat centered(C, L);
  Vec norms(C);
  for (Eigen::Index i = 0; i < C; ++i) {
    double mean = seg.row(i).mean();
    centered.row(i) = seg.row(i).array() - mean;
    norms(i) = centered.row(i).norm();
    double scale = seg.row(i).cwiseAbs().maxCoeff();
    if (norms(i) <= 1e-12 * std::sqrt(static_cast<double>(L)) * (1.0 + scale))
      fail(ErrorCode::DegenerateChannel, "channel " + std::to_string(i) + " has zero variance");
  }

  Mat corr = Mat::Identity(C, C);
  for (Eigen::Index i = 0; i < C; ++i)
    for (Eigen::Index j = i + 1; j < C; ++j) {
      double r = centered.row(i).dot(centered.row(j)) / (norms(i) * norms(j));
      if (r > 1.0) r = 1.0;
      if (r < -1.0) r = -1.0;
      corr(i, j) = corr(j, i) = r;
    }
  return corr;
}

SpdSequence build_state_sequence(const FrontendParams& p, const ElectrodeLayout& layout,
                                 const Recording& x, double gamma, double eps,
                                 double jitter, std::uint64_t noise_key) {
  validate_frontend_params(p, x.channels(), x.samples());
  if (layout.channels() != x.channels()) fail(ErrorCode::Shape, "layout/recording channel mismatch");

  Mat filtered = spatiotemporal_filter(p, x.data);
  Mat gpe = geometric_position_encoding(layout, static_cast<int>(p.proj.rows()) / 3, p.gains);
  Mat features = inject_position(filtered, gpe, p.proj);
  std::vector<Mat> segs = segment(features, p.segments);

  SpdSequence states;
  states.reserve(segs.size());
  for (std::size_t m = 0; m < segs.size(); ++m) {
    Mat seg = segs[m];
    if (jitter > 0.0) {
      Rng rng(derive_seed(noise_key, "jitter", m));
      for (Eigen::Index i = 0; i < seg.rows(); ++i)
        for (Eigen::Index t = 0; t < seg.cols(); ++t) seg(i, t) += jitter * rng.normal();
    }
    states.push_back(spd::to_spd(correlation_state(seg), gamma, eps));
  }
  return states;
}

}  // namespace remind::frontend
