#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace remind {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using BoolMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Ordered sequence of SPD (or symmetric) matrices, all of the same dimension.
using SpdSequence = std::vector<Mat>;

inline constexpr double kSpdMinEigenvalue = 1e-9;   // strict positive-definiteness tolerance
inline constexpr double kSymmetryTolerance = 1e-10; // max |a_ij - a_ji| accepted as symmetric
inline constexpr double kFullRankSigmaMin = 1e-8;   // smallest singular value accepted as full rank

}  // namespace remind
