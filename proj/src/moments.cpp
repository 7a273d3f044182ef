#include "fbsde/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace fbsde {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> estimate_moments(const Ensemble& states, int step) {
    const int N = states.n_samples();
    if (N < 2) throw std::invalid_argument("estimate_moments: need at least 2 samples");
    if (step < 0 || step > states.n_steps()) {
        throw std::invalid_argument("estimate_moments: step out of range");
    }
    const Eigen::MatrixXd& x = states.steps[static_cast<std::size_t>(step)];
    const int n = states.dim();

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < N; ++i) mean += x.col(i);
    mean /= static_cast<double>(N);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < N; ++i) {
        const Eigen::VectorXd d = x.col(i) - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(N);
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {std::move(mean), std::move(cov)};
}

Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& cov, double* eps_out) {
    const int n = static_cast<int>(cov.rows());
    const double eps = 1e-8 * std::max(cov.trace() / static_cast<double>(n), 1.0);
    const Eigen::MatrixXd reg = cov + eps * Eigen::MatrixXd::Identity(n, n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
    if (ldlt.info() != Eigen::Success || !inv.allFinite()) {
        throw std::runtime_error("regularized_inverse: inversion failed after regularization");
    }
    inv = 0.5 * (inv + inv.transpose()).eval();
    if (eps_out) *eps_out = eps;
    return inv;
}

Eigen::VectorXd follmer_drift_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov_inv, const Eigen::MatrixXd& D) {
    return D * (cov_inv * (x - mean));
}

MomentSchedule MomentSchedule::from_ensemble(const Ensemble& states) {
    MomentSchedule ms;
    const int count = states.n_steps() + 1;
    ms.mean.resize(static_cast<std::size_t>(count));
    ms.cov.resize(static_cast<std::size_t>(count));
    ms.cov_inv.resize(static_cast<std::size_t>(count));
    ms.eps.resize(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        auto [mean, cov] = estimate_moments(states, k);
        ms.mean[static_cast<std::size_t>(k)] = std::move(mean);
        ms.cov_inv[static_cast<std::size_t>(k)] =
            regularized_inverse(cov, &ms.eps[static_cast<std::size_t>(k)]);
        ms.cov[static_cast<std::size_t>(k)] = std::move(cov);
    }
    return ms;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& S) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw std::runtime_error("psd_factor: matrix has a negative eigenvalue below -1e-10");
    }
    return es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace fbsde
