#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace lighterx {

using Eigen::Index;

/// Dense matrices are row-major so that gathering node rows is contiguous.
template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVectorT = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using DenseMatrix = RowMatrix<double>;
using DenseMatrixF = RowMatrix<float>;
using Vector = Eigen::VectorXd;

}  // namespace lighterx
