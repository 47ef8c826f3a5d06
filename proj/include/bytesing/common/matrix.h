#ifndef BYTESING_COMMON_MATRIX_H_
#define BYTESING_COMMON_MATRIX_H_

#include <Eigen/Dense>

namespace bytesing {

// Row-major so that a (time x channels) sequence stores each frame
// contiguously and reshapes between (1 x r*C) and (r x C) are free.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

}  // namespace bytesing

#endif  // BYTESING_COMMON_MATRIX_H_
