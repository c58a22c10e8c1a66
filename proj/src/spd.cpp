#include "remind/spd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace remind::spd {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagTol = 1e-12;

std::string dim_string(const Mat& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

}  // namespace

bool is_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

void require_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) fail(ErrorCode::Shape, "matrix is not square: " + dim_string(a));
  if (!is_symmetric(a, tol)) fail(ErrorCode::Symmetry, "matrix is not symmetric within tolerance");
}

void require_same_dim(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::Shape, "dimension mismatch: " + dim_string(a) + " vs " + dim_string(b));
}

EigenDecomp sym_eigen(const Mat& input) {
  require_symmetric(input);
  const Eigen::Index n = input.rows();

  Mat a = (input + input.transpose()) * 0.5;
  Mat v = Mat::Identity(n, n);
  const double tol = kOffDiagTol * (1.0 + a.norm());

  auto off_norm = [&a, n]() {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  bool converged = (n <= 1) || off_norm() <= tol;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (tau >= 0.0)
          t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
        else
          t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Rotate rows/columns p and q of A, and columns p and q of V.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_norm() <= tol;
  }
  if (!converged) fail(ErrorCode::Convergence, "Jacobi eigensolver did not converge in 100 sweeps");

  EigenDecomp out;
  out.eigenvalues = a.diagonal();
  out.eigenvectors = std::move(v);

  // Sort ascending; stable on ties so output is deterministic.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&out](Eigen::Index i, Eigen::Index j) {
    return out.eigenvalues(i) < out.eigenvalues(j);
  });
  Vec sorted_vals(n);
  Mat sorted_vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sorted_vals(i) = out.eigenvalues(order[static_cast<std::size_t>(i)]);
    sorted_vecs.col(i) = out.eigenvectors.col(order[static_cast<std::size_t>(i)]);
  }
  out.eigenvalues = std::move(sorted_vals);
  out.eigenvectors = std::move(sorted_vecs);
  return out;
}

Mat apply_spectral(const EigenDecomp& eig, double (*f)(double)) {
  Vec fv = eig.eigenvalues.unaryExpr([f](double x) { return f(x); });
  Mat m = eig.eigenvectors * fv.asDiagonal() * eig.eigenvectors.transpose();
  return (m + m.transpose()) * 0.5;
}

double min_eigenvalue(const Mat& a) { return sym_eigen(a).eigenvalues(0); }

bool is_spd(const Mat& a, double tol) {
  if (!is_symmetric(a)) return false;
  return min_eigenvalue(a) > tol;
}

double smallest_singular_value(const Mat& w) {
  if (w.rows() != w.cols()) fail(ErrorCode::Shape, "expected a square map, got " + dim_string(w));
  Mat gram = w.transpose() * w;
  double lmin = sym_eigen((gram + gram.transpose()) * 0.5).eigenvalues(0);
  return std::sqrt(std::max(lmin, 0.0));
}

Mat spd_log(const Mat& p) {
  EigenDecomp eig = sym_eigen(p);
  if (eig.eigenvalues(0) <= 0.0)
    fail(ErrorCode::NotPositiveDefinite,
         "matrix log requires positive eigenvalues; smallest is " + std::to_string(eig.eigenvalues(0)));
  return apply_spectral(eig, [](double x) { return std::log(x); });
}

Mat spd_exp(const Mat& s) {
  EigenDecomp eig = sym_eigen(s);
  return apply_spectral(eig, [](double x) { return std::exp(x); });
}

double le_distance(const Mat& p, const Mat& q) {
  require_same_dim(p, q);
  return (spd_log(p) - spd_log(q)).norm();
}

Mat weighted_le_mean(const Vec& weights, const SpdSequence& mats) {
  if (mats.empty()) fail(ErrorCode::Arity, "weighted mean of an empty sequence");
  if (weights.size() != static_cast<Eigen::Index>(mats.size()))
    fail(ErrorCode::Shape, "weight count does not match matrix count");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) < 0.0) fail(ErrorCode::Weight, "negative weight in simplex vector");
    sum += weights(i);
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::Weight, "weights sum to " + std::to_string(sum));

  Mat acc = Mat::Zero(mats[0].rows(), mats[0].cols());
  for (std::size_t i = 0; i < mats.size(); ++i) {
    require_same_dim(mats[0], mats[i]);
    acc += weights(static_cast<Eigen::Index>(i)) * spd_log(mats[i]);
  }
  return spd_exp(acc);
}

Mat congruence(const Mat& w, const Mat& p) {
  if (w.rows() != w.cols() || w.rows() != p.rows())
    fail(ErrorCode::Shape, "map/matrix dimension mismatch");
  if (smallest_singular_value(w) < kFullRankSigmaMin)
    fail(ErrorCode::DegenerateMap, "congruence map is rank-deficient");
  Mat m = w * p * w.transpose();
  return (m + m.transpose()) * 0.5;
}

Mat to_spd(const Mat& g, double gamma, double eps) {
  require_symmetric(g);
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorCode::Parameter, "shrinkage must lie in [0, 1)");

  Mat shrunk = gamma == 0.0 ? g : Mat((1.0 - gamma) * g + gamma * Mat::Identity(g.rows(), g.cols()));
  EigenDecomp eig = sym_eigen(shrunk);
  if (eig.eigenvalues(0) > eps) return shrunk;

  Vec floored = eig.eigenvalues.cwiseMax(eps);
  Mat m = eig.eigenvectors * floored.asDiagonal() * eig.eigenvectors.transpose();
  return (m + m.transpose()) * 0.5;
}

}  // namespace remind::spd
