#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fbsde/ensemble.hpp"
#include "fbsde/lq_model.hpp"
#include "fbsde/moments.hpp"
#include "fbsde/riccati.hpp"
#include "fbsde/time_grid.hpp"
#include "fbsde/wiener.hpp"

namespace fbsde {

struct SolverConfig {
    int n_samples = 1000;
    int n_iters = 75;
    double step_size = 0.02;
    std::uint64_t seed = 0;
    bool record_history = false;     // keep per-iteration gain schedules
    bool resample_terminal = true;   // fresh terminal samples each iteration
};

// All iterates of one solver run. Ensembles share grid and sample count;
// the Wiener ensembles are drawn once at init and frozen.
struct SolverState {
    int iter = 0;
    Eigen::MatrixXd initial_states;  // n x N, fixed across iterations
    Ensemble forward_states;
    Ensemble reversed_states;
    Ensemble adjoints;
    Ensemble forward_controls;   // m-dim, defined at every grid point
    Ensemble reversed_controls;  // m-dim, defined at every grid point
    MomentSchedule moments;
    GainSchedule gains;
    std::vector<double> cost_history;
    WienerEnsemble w_forward;
    WienerEnsemble w_reversed;
};

struct SolverOutput {
    GainSchedule gains;
    std::vector<double> cost_history;
    Ensemble forward_states;
    Ensemble reversed_states;
    Ensemble adjoints;
    SolverConfig config;
    double wall_time_s = 0.0;
    std::vector<GainSchedule> gain_history;  // only when record_history
};

struct BackwardResult {
    Ensemble reversed_states;
    Ensemble adjoints;
    GainSchedule gains;
};

// Draws X0 ~ N(m0, Sigma0) (Cholesky factor, eigendecomposition fallback),
// zero controls, and both Wiener ensembles.
SolverState init(const LqProblem& prob, const TimeGrid& grid, const SolverConfig& cfg);

// Euler-Maruyama with left-endpoint drift A X + B U and the frozen forward
// increments; initial samples reused every iteration.
void forward_pass(SolverState& state, const LqProblem& prob, const TimeGrid& grid);

// One backward sweep of the time-reversed FBSDE with online per-step
// regression. Terminal states: resampled from N(m_T, Sigma_T) on a
// per-iteration substream when terminal_states is null, otherwise taken as
// given (n x N). When feedback is non-null the reversed control at step k is
// feedback[k] * X at that step instead of the stored open-loop array.
BackwardResult backward_sweep(const LqProblem& prob, const TimeGrid& grid,
                              const MomentSchedule& moments, const Ensemble& reversed_controls,
                              const WienerEnsemble& w_reversed, std::uint64_t seed, int iter,
                              const Eigen::MatrixXd* terminal_states = nullptr,
                              const std::vector<Eigen::MatrixXd>* feedback = nullptr);

// backward_sweep wired into the solver state (honors resample_terminal).
void backward_pass(SolverState& state, const LqProblem& prob, const TimeGrid& grid,
                   const SolverConfig& cfg);

// Gradient step U <- U - eta (R U + B'Y) at every grid point; Y = G1(t) X on
// forward paths and the simulated adjoint on reversed paths.
void control_update(SolverState& state, const LqProblem& prob, const TimeGrid& grid, double eta);

// init, then n_iters of forward pass -> moment estimation -> cost recording
// -> backward sweep -> control update. Deterministic given cfg.seed.
SolverOutput solve(const LqProblem& prob, const TimeGrid& grid, const SolverConfig& cfg);

// Open-loop ensemble simulation of the forward dynamics.
Ensemble simulate_forward(const LqProblem& prob, const TimeGrid& grid, const Eigen::MatrixXd& x0,
                          const Ensemble& controls, const WienerEnsemble& w);

// Closed-loop simulation with per-step feedback U = K(t) X; optionally
// records the realized controls.
Ensemble simulate_forward_feedback(const LqProblem& prob, const TimeGrid& grid,
                                   const Eigen::MatrixXd& x0,
                                   const std::vector<Eigen::MatrixXd>& feedback,
                                   const WienerEnsemble& w, Ensemble* controls_out = nullptr);

// K(t) = -R^{-1} B' G1(t) per grid point.
std::vector<Eigen::MatrixXd> feedback_from_gains(const LqProblem& prob, const GainSchedule& gains);

}  // namespace fbsde
