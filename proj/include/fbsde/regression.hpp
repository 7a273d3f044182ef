#pragma once

#include <Eigen/Dense>

namespace fbsde {

// Least-squares gain: argmin_G (1/N) sum_i ||Y_i - G X_i||^2 via the
// normal equations G = (sum Y X')(sum X X' + eps I)^{-1}, no intercept.
// states and adjoints are n x N (column = sample). Requires N >= n.
// Throws std::runtime_error when the second-moment matrix is degenerate
// even after regularization.
Eigen::MatrixXd fit_gain(const Eigen::MatrixXd& states, const Eigen::MatrixXd& adjoints);

}  // namespace fbsde
