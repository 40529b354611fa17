// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace fracprop {

using Index = Eigen::Index;

using Eigen::MatrixXd;
using Eigen::VectorXd;

// N x F, one column per feature channel.
using FeatureMatrix = Eigen::MatrixXd;

// Scalar-generic aliases for code that is not tied to double.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr Index kUnreachable = std::numeric_limits<Index>::max();

}  // namespace fracprop
