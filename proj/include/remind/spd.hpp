#pragma once

#include "remind/common.hpp"
#include "remind/error.hpp"

namespace remind::spd {

/// Eigendecomposition of a symmetric matrix: A = V diag(lambda) V^T,
/// eigenvalues ascending, eigenvectors orthonormal in columns.
struct EigenDecomp {
  Vec eigenvalues;
  Mat eigenvectors;
};

bool is_symmetric(const Mat& a, double tol = kSymmetryTolerance);
void require_symmetric(const Mat& a, double tol = kSymmetryTolerance);
void require_same_dim(const Mat& a, const Mat& b);

/// Cyclic Jacobi eigendecomposition for symmetric matrices. Deterministic:
/// fixed row-cyclic sweep order, off-diagonal Frobenius tolerance
/// 1e-12 * (1 + |A|_F), at most 100 sweeps.
EigenDecomp sym_eigen(const Mat& a);

/// V f(lambda) V^T, symmetrized.
Mat apply_spectral(const EigenDecomp& eig, double (*f)(double));

/// Smallest eigenvalue (via sym_eigen).
double min_eigenvalue(const Mat& a);

/// Symmetric with all eigenvalues above tol.
bool is_spd(const Mat& a, double tol = kSpdMinEigenvalue);

/// Smallest singular value of a square matrix (via the eigenvalues of W^T W).
double smallest_singular_value(const Mat& w);

/// Matrix logarithm of an SPD matrix.
Mat spd_log(const Mat& p);

/// Matrix exponential of a symmetric matrix; always SPD.
Mat spd_exp(const Mat& s);

/// Log-Euclidean distance |Log(P) - Log(Q)|_F.
double le_distance(const Mat& p, const Mat& q);

/// Weighted Log-Euclidean mean exp(sum_i w_i log(P_i)). Weights must lie on the
/// simplex (non-negative, summing to 1 within 1e-9).
Mat weighted_le_mean(const Vec& weights, const SpdSequence& mats);

/// Congruence map W P W^T. Rejects rank-deficient W (sigma_min < 1e-8).
Mat congruence(const Mat& w, const Mat& p);

/// Positive-definite projection: eigenvalue floor at eps applied to the
/// shrunk matrix (1-gamma) G + gamma I. With gamma = 0 and min eigenvalue
/// above eps the input is returned unchanged.
Mat to_spd(const Mat& g, double gamma, double eps);

}  // namespace remind::spd
