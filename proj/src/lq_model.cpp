#include "fbsde/lq_model.hpp"

#include <sstream>
#include <stdexcept>

namespace fbsde {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool symmetric(const Eigen::MatrixXd& M, double tol = 1e-10) {
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, M.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

void LqProblem::validate() const {
    const int n = state_dim();
    const int m = control_dim();
    require(n >= 1, "LqProblem: A must be non-empty square");
    require(A.rows() == n && A.cols() == n, "LqProblem: A must be n x n");
    require(B.rows() == n && m >= 1, "LqProblem: B must be n x m");
    require(sigma.rows() == n && sigma.cols() == n, "LqProblem: sigma must be n x n");
    require(Q.rows() == n && Q.cols() == n, "LqProblem: Q must be n x n");
    require(R.rows() == m && R.cols() == m, "LqProblem: R must be m x m");
    require(Q_f.rows() == n && Q_f.cols() == n, "LqProblem: Q_f must be n x n");
    require(m0.size() == n, "LqProblem: m0 must have length n");
    require(Sigma0.rows() == n && Sigma0.cols() == n, "LqProblem: Sigma0 must be n x n");
    require(horizon > 0.0, "LqProblem: horizon must be > 0");

    require(symmetric(Q), "LqProblem: Q must be symmetric");
    require(symmetric(R), "LqProblem: R must be symmetric");
    require(symmetric(Q_f), "LqProblem: Q_f must be symmetric");
    require(symmetric(Sigma0), "LqProblem: Sigma0 must be symmetric");
    require(min_eigenvalue(Q) >= -1e-10, "LqProblem: Q must be positive semi-definite");
    require(min_eigenvalue(Q_f) >= -1e-10, "LqProblem: Q_f must be positive semi-definite");
    require(min_eigenvalue(Sigma0) >= -1e-10, "LqProblem: Sigma0 must be positive semi-definite");
    require(min_eigenvalue(R) > 0.0, "LqProblem: R must be positive definite");
    require(min_eigenvalue(D()) > 0.0, "LqProblem: D = sigma*sigma^T must be positive definite");
}

LqProblem LqProblem::mass_spring(double horizon) {
    LqProblem p;
    p.A.resize(2, 2);
    p.A << 0.0, 1.0, -1.0, 0.0;
    p.B.resize(2, 1);
    p.B << 0.0, 1.0;
    p.sigma = Eigen::MatrixXd::Identity(2, 2);
    p.Q = Eigen::MatrixXd::Identity(2, 2);
    p.R = Eigen::MatrixXd::Identity(1, 1);
    p.Q_f = Eigen::MatrixXd::Identity(2, 2);
    p.m0 = Eigen::VectorXd::Zero(2);
    p.Sigma0 = Eigen::MatrixXd::Identity(2, 2);
    p.horizon = horizon;
    return p;
}

double hamiltonian(const LqProblem& prob, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& y, const Eigen::MatrixXd& z) {
    return 0.5 * (x.dot(prob.Q * x) + u.dot(prob.R * u)) + y.dot(prob.A * x + prob.B * u) +
           (prob.sigma.transpose() * z).trace();
}

Eigen::VectorXd hamiltonian_du(const LqProblem& prob, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& y) {
    return prob.R * u + prob.B.transpose() * y;
}

Eigen::VectorXd optimal_feedback(const LqProblem& prob, const Eigen::VectorXd& y) {
    return -prob.R.ldlt().solve(prob.B.transpose() * y);
}

double cost_estimate(const LqProblem& prob, const Ensemble& states, const Ensemble& controls,
                     const TimeGrid& grid) {
    const int n_steps = grid.n_steps;
    if (states.n_steps() != n_steps || controls.n_steps() < n_steps - 1 ||
        states.n_samples() != controls.n_samples()) {
        throw std::invalid_argument("cost_estimate: ensembles do not share grid and sample count");
    }
    const int N = states.n_samples();
    double total = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        const Eigen::MatrixXd& x = states.steps[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd& u = controls.steps[static_cast<std::size_t>(k)];
        const double state_cost = (x.cwiseProduct(prob.Q * x)).sum();
        const double control_cost = (u.cwiseProduct(prob.R * u)).sum();
        total += 0.5 * (state_cost + control_cost) * grid.dt;
    }
    const Eigen::MatrixXd& xT = states.steps[static_cast<std::size_t>(n_steps)];
    total += 0.5 * (xT.cwiseProduct(prob.Q_f * xT)).sum();
    return total / static_cast<double>(N);
}

}  // namespace fbsde
