#pragma once

#include <Eigen/Dense>

#include "fbsde/ensemble.hpp"
#include "fbsde/wiener.hpp"

namespace fbsde {

// One Euler-Maruyama step: x + drift*dt + sigma*dW.
Eigen::VectorXd forward_euler_step(const Eigen::VectorXd& x, const Eigen::VectorXd& drift,
                                   const Eigen::MatrixXd& sigma, const Eigen::VectorXd& dW,
                                   double dt);

// One backward step: x - drift*dt - sigma*dW. Exact inverse of
// forward_euler_step when the drift is evaluated at the same point.
Eigen::VectorXd backward_euler_step(const Eigen::VectorXd& x, const Eigen::VectorXd& drift,
                                    const Eigen::MatrixXd& sigma, const Eigen::VectorXd& dW,
                                    double dt);

// Discrete backward stochastic integral with right-endpoint evaluation:
// per sample and coordinate, sum_{k=from_step}^{n_steps-1} V_{k+1} .* dW_k.
// The integrand is evaluated at the later endpoint of each increment
// (backward-adaptedness). Returns dim x n_samples.
Eigen::MatrixXd backward_integral(const Ensemble& integrand, const WienerEnsemble& paths,
                                  int from_step);

}  // namespace fbsde
