#pragma once

#include <Eigen/Core>

namespace ddgk {

// Row-major dense matrix of doubles; the numeric currency of the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace ddgk
