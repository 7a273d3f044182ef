#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fbsde/lq_model.hpp"
#include "fbsde/time_grid.hpp"

namespace fbsde {

// Per-grid-point adjoint map Y = G1(t) X + G2(t). g2 may be empty when the
// affine offset is identically zero (e.g. regression output).
struct GainSchedule {
    std::vector<Eigen::MatrixXd> g1;  // n x n per grid point
    std::vector<Eigen::VectorXd> g2;  // n per grid point, optional

    bool has_g2() const { return !g2.empty(); }
    int n_steps() const { return static_cast<int>(g1.size()) - 1; }
};

// Affine control U = K1 X + K2 Y + K3 vec(Z) + K4, per grid point.
// k3 maps the vectorized n x n adjoint diffusion coefficient to R^m.
struct AffineControlLaw {
    std::vector<Eigen::MatrixXd> k1;  // m x n
    std::vector<Eigen::MatrixXd> k2;  // m x n
    std::vector<Eigen::MatrixXd> k3;  // m x (n*n)
    std::vector<Eigen::VectorXd> k4;  // m

    // K2 = -R^{-1} B', K1 = K3 = 0, K4 = 0 at every grid point.
    static AffineControlLaw optimal(const LqProblem& prob, int n_steps);
    static AffineControlLaw zero(const LqProblem& prob, int n_steps);
};

// Backward integration of the coupled gain ODEs
//   G1' = -(G1 A + A'G1 + G1 B K1 + G1 B K2 G1 + Q),        G1(T) = Q_f,
//   G2' = -(G1 B (K2 G2 + K3 vec(G1 sigma) + K4) + A'G2),   G2(T) = 0,
// with classical 4-stage Runge-Kutta on the grid, G1 symmetrized after
// every step. Throws std::runtime_error with the step index on blow-up.
GainSchedule affine_gain_odes(const LqProblem& prob, const AffineControlLaw& law,
                              const TimeGrid& grid);

// Riccati equation G1' = -(G1 A + A'G1 + Q - G1 B R^{-1} B' G1), G1(T) = Q_f.
// Identical arithmetic to affine_gain_odes with the optimal law.
GainSchedule riccati_solve(const LqProblem& prob, const TimeGrid& grid);

// Exact LQG value J* = 1/2 m0'G1(0)m0 + 1/2 Tr(G1(0) Sigma0)
//                    + 1/2 int_0^T Tr(sigma sigma' G1(t)) dt,
// trapezoidal rule on the trace integral, G1 from riccati_solve.
double optimal_cost_oracle(const LqProblem& prob, const TimeGrid& grid);

}  // namespace fbsde
