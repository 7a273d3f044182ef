#pragma once

#include <Eigen/Dense>

#include "fbsde/ensemble.hpp"
#include "fbsde/time_grid.hpp"

namespace fbsde {

// Linear dynamics dX = (A X + B U) dt + sigma dW, Gaussian initial law
// N(m0, Sigma0), quadratic cost with rates Q (state), R (control) and
// terminal weight Q_f.
struct LqProblem {
    Eigen::MatrixXd A;       // n x n
    Eigen::MatrixXd B;       // n x m
    Eigen::MatrixXd sigma;   // n x n
    Eigen::MatrixXd Q;       // n x n, symmetric PSD
    Eigen::MatrixXd R;       // m x m, symmetric PD
    Eigen::MatrixXd Q_f;     // n x n, symmetric PSD
    Eigen::VectorXd m0;      // n
    Eigen::MatrixXd Sigma0;  // n x n, symmetric PSD
    double horizon = 1.0;

    int state_dim() const { return static_cast<int>(A.rows()); }
    int control_dim() const { return static_cast<int>(B.cols()); }
    Eigen::MatrixXd D() const { return sigma * sigma.transpose(); }

    // Throws std::invalid_argument naming the offending field. Requires
    // consistent shapes, Q/Q_f/Sigma0 symmetric PSD, R symmetric PD and
    // D = sigma*sigma^T positive definite.
    void validate() const;

    // The two-dimensional mass-spring benchmark problem:
    // A = [[0,1],[-1,0]], B = [0;1], sigma = Q = Q_f = Sigma0 = I, R = 1,
    // m0 = 0, horizon 1.
    static LqProblem mass_spring(double horizon = 1.0);
};

// H(x,u,y,z) = 1/2 (x'Qx + u'Ru) + y'(Ax + Bu) + Tr(sigma' z).
double hamiltonian(const LqProblem& prob, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& y, const Eigen::MatrixXd& z);

// dH/du = R u + B' y.
Eigen::VectorXd hamiltonian_du(const LqProblem& prob, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& y);

// The Hamiltonian minimizer in u: -R^{-1} B' y.
Eigen::VectorXd optimal_feedback(const LqProblem& prob, const Eigen::VectorXd& y);

// Monte-Carlo estimate of J = E[ int_0^T 1/2 (X'QX + U'RU) dt + 1/2 X_T'Q_f X_T ].
// Left-Riemann quadrature for the running cost (controls used at steps
// 0..n_steps-1), sample average over the ensemble.
double cost_estimate(const LqProblem& prob, const Ensemble& states, const Ensemble& controls,
                     const TimeGrid& grid);

}  // namespace fbsde
