#pragma once

#include <Eigen/Dense>

namespace tabsynth {

// Row-major dense matrix. Training runs in float, oracle/test code in double.
template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

}  // namespace tabsynth
