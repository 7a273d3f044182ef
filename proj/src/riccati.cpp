#include "fbsde/riccati.hpp"

#include <sstream>
#include <stdexcept>

namespace fbsde {

namespace {

struct LawAt {
    Eigen::MatrixXd k1, k2, k3;
    Eigen::VectorXd k4;
};

struct GainPair {
    Eigen::MatrixXd g1;
    Eigen::VectorXd g2;
};

Eigen::VectorXd vec(const Eigen::MatrixXd& M) {
    return Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
}

GainPair ode_rhs(const LqProblem& prob, const LawAt& law, const GainPair& g) {
    GainPair d;
    d.g1 = -(g.g1 * prob.A + prob.A.transpose() * g.g1 + g.g1 * prob.B * law.k1 +
             g.g1 * prob.B * law.k2 * g.g1 + prob.Q);
    d.g2 = -(g.g1 * prob.B * (law.k2 * g.g2 + law.k3 * vec(g.g1 * prob.sigma) + law.k4) +
             prob.A.transpose() * g.g2);
    return d;
}

LawAt law_at(const AffineControlLaw& law, int k) {
    return {law.k1[static_cast<std::size_t>(k)], law.k2[static_cast<std::size_t>(k)],
            law.k3[static_cast<std::size_t>(k)], law.k4[static_cast<std::size_t>(k)]};
}

LawAt law_mid(const LawAt& a, const LawAt& b) {
    return {0.5 * (a.k1 + b.k1), 0.5 * (a.k2 + b.k2), 0.5 * (a.k3 + b.k3), 0.5 * (a.k4 + b.k4)};
}

}  // namespace

AffineControlLaw AffineControlLaw::optimal(const LqProblem& prob, int n_steps) {
    const int n = prob.state_dim();
    const int m = prob.control_dim();
    const Eigen::MatrixXd k2 = -prob.R.ldlt().solve(prob.B.transpose());
    AffineControlLaw law;
    const auto count = static_cast<std::size_t>(n_steps) + 1;
    law.k1.assign(count, Eigen::MatrixXd::Zero(m, n));
    law.k2.assign(count, k2);
    law.k3.assign(count, Eigen::MatrixXd::Zero(m, n * n));
    law.k4.assign(count, Eigen::VectorXd::Zero(m));
    return law;
}

AffineControlLaw AffineControlLaw::zero(const LqProblem& prob, int n_steps) {
    const int n = prob.state_dim();
    const int m = prob.control_dim();
    AffineControlLaw law;
    const auto count = static_cast<std::size_t>(n_steps) + 1;
    law.k1.assign(count, Eigen::MatrixXd::Zero(m, n));
    law.k2.assign(count, Eigen::MatrixXd::Zero(m, n));
    law.k3.assign(count, Eigen::MatrixXd::Zero(m, n * n));
    law.k4.assign(count, Eigen::VectorXd::Zero(m));
    return law;
}

GainSchedule affine_gain_odes(const LqProblem& prob, const AffineControlLaw& law,
                              const TimeGrid& grid) {
    const int n = prob.state_dim();
    const int n_steps = grid.n_steps;
    if (static_cast<int>(law.k1.size()) != n_steps + 1) {
        throw std::invalid_argument("affine_gain_odes: law not defined at every grid point");
    }

    GainSchedule out;
    out.g1.resize(static_cast<std::size_t>(n_steps) + 1);
    out.g2.resize(static_cast<std::size_t>(n_steps) + 1);

    GainPair g{prob.Q_f, Eigen::VectorXd::Zero(n)};
    out.g1[static_cast<std::size_t>(n_steps)] = g.g1;
    out.g2[static_cast<std::size_t>(n_steps)] = g.g2;

    const double h = -grid.dt;  // integrating backward in time
    for (int k = n_steps - 1; k >= 0; --k) {
        const LawAt right = law_at(law, k + 1);
        const LawAt left = law_at(law, k);
        const LawAt mid = law_mid(left, right);

        const GainPair d1 = ode_rhs(prob, right, g);
        const GainPair d2 =
            ode_rhs(prob, mid, {g.g1 + 0.5 * h * d1.g1, g.g2 + 0.5 * h * d1.g2});
        const GainPair d3 =
            ode_rhs(prob, mid, {g.g1 + 0.5 * h * d2.g1, g.g2 + 0.5 * h * d2.g2});
        const GainPair d4 = ode_rhs(prob, left, {g.g1 + h * d3.g1, g.g2 + h * d3.g2});

        g.g1 += (h / 6.0) * (d1.g1 + 2.0 * d2.g1 + 2.0 * d3.g1 + d4.g1);
        g.g2 += (h / 6.0) * (d1.g2 + 2.0 * d2.g2 + 2.0 * d3.g2 + d4.g2);
        g.g1 = 0.5 * (g.g1 + g.g1.transpose()).eval();  // exact flow preserves symmetry

        if (!g.g1.allFinite() || !g.g2.allFinite()) {
            std::ostringstream msg;
            msg << "affine_gain_odes: non-finite gain at step " << k;
            throw std::runtime_error(msg.str());
        }
        out.g1[static_cast<std::size_t>(k)] = g.g1;
        out.g2[static_cast<std::size_t>(k)] = g.g2;
    }
    return out;
}

GainSchedule riccati_solve(const LqProblem& prob, const TimeGrid& grid) {
    return affine_gain_odes(prob, AffineControlLaw::optimal(prob, grid.n_steps), grid);
}

double optimal_cost_oracle(const LqProblem& prob, const TimeGrid& grid) {
    const GainSchedule gains = riccati_solve(prob, grid);
    const Eigen::MatrixXd D = prob.D();
    double integral = 0.0;
    for (int k = 0; k <= grid.n_steps; ++k) {
        const double f = (D * gains.g1[static_cast<std::size_t>(k)]).trace();
        const double weight = (k == 0 || k == grid.n_steps) ? 0.5 : 1.0;
        integral += weight * f * grid.dt;
    }
    const Eigen::MatrixXd& g0 = gains.g1.front();
    return 0.5 * prob.m0.dot(g0 * prob.m0) + 0.5 * (g0 * prob.Sigma0).trace() + 0.5 * integral;
}

}  // namespace fbsde
