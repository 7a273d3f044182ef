#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fbsde/ensemble.hpp"

namespace fbsde {

// Per-grid-point empirical mean and covariance of an ensemble together with
// the regularized covariance inverses used in the Follmer drift.
struct MomentSchedule {
    std::vector<Eigen::VectorXd> mean;
    std::vector<Eigen::MatrixXd> cov;
    std::vector<Eigen::MatrixXd> cov_inv;
    std::vector<double> eps;  // regularization recorded per step

    static MomentSchedule from_ensemble(const Ensemble& states);
};

// Biased (1/N) moments, reduction in sample-index order:
// m = (1/N) sum X_i, C = (1/N) sum (X_i - m)(X_i - m)'. Requires N >= 2.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> estimate_moments(const Ensemble& states, int step);

// (cov + eps I)^{-1} with eps = 1e-8 * max(Tr(cov)/n, 1). Symmetric output.
Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& cov, double* eps_out = nullptr);

// Gaussian Follmer drift b(x) = D * cov_inv * (x - mean); for a Gaussian
// density this equals -D * grad log p up to the sign convention of the
// reversed SDE.
Eigen::VectorXd follmer_drift_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov_inv, const Eigen::MatrixXd& D);

// A matrix L with L L' = S for symmetric PSD S: Cholesky when S is PD,
// eigendecomposition fallback for singular S. Throws when S has an
// eigenvalue below -1e-10.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& S);

}  // namespace fbsde
