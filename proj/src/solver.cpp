#include "fbsde/solver.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

#include "fbsde/regression.hpp"

namespace fbsde {

namespace {

constexpr double kDivergenceGuard = 1e6;

void check_finite_bounded(const Eigen::MatrixXd& x, int iter, int step, const char* who) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceGuard) {
        Eigen::Index row = 0, col = 0;
        x.cwiseAbs().maxCoeff(&row, &col);
        std::ostringstream msg;
        msg << who << ": divergent or non-finite state (iteration " << iter << ", sample " << col
            << ", step " << step << ")";
        throw std::runtime_error(msg.str());
    }
}

Eigen::MatrixXd standard_normal_matrix(int dim, int n_samples, std::uint64_t seed,
                                       RngDomain domain, std::uint64_t stream_b) {
    Eigen::MatrixXd z(dim, n_samples);
    for (int i = 0; i < n_samples; ++i) {
        RngStream stream(seed, domain, static_cast<std::uint64_t>(i), stream_b);
        for (int j = 0; j < dim; ++j) z(j, i) = stream.gaussian();
    }
    return z;
}

}  // namespace

SolverState init(const LqProblem& prob, const TimeGrid& grid, const SolverConfig& cfg) {
    prob.validate();
    if (cfg.n_samples < 2) throw std::invalid_argument("SolverConfig: n_samples must be >= 2");
    if (cfg.n_iters < 1) throw std::invalid_argument("SolverConfig: n_iters must be >= 1");
    if (!(cfg.step_size >= 0.0)) {
        throw std::invalid_argument("SolverConfig: step_size must be >= 0");
    }

    const int n = prob.state_dim();
    const int m = prob.control_dim();
    const int N = cfg.n_samples;

    SolverState state;
    const Eigen::MatrixXd chol = psd_factor(prob.Sigma0);
    const Eigen::MatrixXd z =
        standard_normal_matrix(n, N, cfg.seed, RngDomain::initial_state, 0);
    state.initial_states = (chol * z).colwise() + prob.m0;

    state.forward_controls = Ensemble::zeros(m, N, grid.n_steps);
    state.reversed_controls = Ensemble::zeros(m, N, grid.n_steps);
    state.w_forward = sample_wiener(grid, n, N, cfg.seed, RngDomain::wiener_forward);
    state.w_reversed = sample_wiener(grid, n, N, cfg.seed, RngDomain::wiener_reversed);
    return state;
}

Ensemble simulate_forward(const LqProblem& prob, const TimeGrid& grid, const Eigen::MatrixXd& x0,
                          const Ensemble& controls, const WienerEnsemble& w) {
    Ensemble states;
    states.steps.resize(static_cast<std::size_t>(grid.n_steps) + 1);
    states.steps[0] = x0;
    for (int k = 0; k < grid.n_steps; ++k) {
        const Eigen::MatrixXd& x = states.steps[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd& u = controls.steps[static_cast<std::size_t>(k)];
        states.steps[static_cast<std::size_t>(k + 1)] =
            x + (prob.A * x + prob.B * u) * grid.dt +
            prob.sigma * w.increments[static_cast<std::size_t>(k)];
        check_finite_bounded(states.steps[static_cast<std::size_t>(k + 1)], 0, k + 1,
                             "simulate_forward");
    }
    return states;
}

Ensemble simulate_forward_feedback(const LqProblem& prob, const TimeGrid& grid,
                                   const Eigen::MatrixXd& x0,
                                   const std::vector<Eigen::MatrixXd>& feedback,
                                   const WienerEnsemble& w, Ensemble* controls_out) {
    const int N = static_cast<int>(x0.cols());
    Ensemble states;
    states.steps.resize(static_cast<std::size_t>(grid.n_steps) + 1);
    states.steps[0] = x0;
    if (controls_out) *controls_out = Ensemble::zeros(prob.control_dim(), N, grid.n_steps);
    for (int k = 0; k < grid.n_steps; ++k) {
        const Eigen::MatrixXd& x = states.steps[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd u = feedback[static_cast<std::size_t>(k)] * x;
        if (controls_out) controls_out->steps[static_cast<std::size_t>(k)] = u;
        states.steps[static_cast<std::size_t>(k + 1)] =
            x + (prob.A * x + prob.B * u) * grid.dt +
            prob.sigma * w.increments[static_cast<std::size_t>(k)];
        check_finite_bounded(states.steps[static_cast<std::size_t>(k + 1)], 0, k + 1,
                             "simulate_forward_feedback");
    }
    if (controls_out) {
        controls_out->steps[static_cast<std::size_t>(grid.n_steps)] =
            feedback[static_cast<std::size_t>(grid.n_steps)] *
            states.steps[static_cast<std::size_t>(grid.n_steps)];
    }
    return states;
}

void forward_pass(SolverState& state, const LqProblem& prob, const TimeGrid& grid) {
    state.forward_states = simulate_forward(prob, grid, state.initial_states,
                                            state.forward_controls, state.w_forward);
}

BackwardResult backward_sweep(const LqProblem& prob, const TimeGrid& grid,
                              const MomentSchedule& moments, const Ensemble& reversed_controls,
                              const WienerEnsemble& w_reversed, std::uint64_t seed, int iter,
                              const Eigen::MatrixXd* terminal_states,
                              const std::vector<Eigen::MatrixXd>* feedback) {
    const int n = prob.state_dim();
    const int n_steps = grid.n_steps;
    const int N = w_reversed.n_samples();
    const double dt = grid.dt;
    const Eigen::MatrixXd D = prob.D();

    BackwardResult result;
    result.reversed_states.steps.resize(static_cast<std::size_t>(n_steps) + 1);
    result.adjoints.steps.resize(static_cast<std::size_t>(n_steps) + 1);
    result.gains.g1.resize(static_cast<std::size_t>(n_steps) + 1);

    // Terminal condition: fresh samples from N(m_T, Sigma_T) unless reuse
    // was requested, then Y_T = Q_f X_T and a first regression fit.
    Eigen::MatrixXd x_terminal;
    if (terminal_states) {
        x_terminal = *terminal_states;
    } else {
        const Eigen::MatrixXd chol =
            psd_factor(moments.cov[static_cast<std::size_t>(n_steps)]);
        const Eigen::MatrixXd z = standard_normal_matrix(
            n, N, seed, RngDomain::terminal_resample, static_cast<std::uint64_t>(iter));
        x_terminal = (chol * z).colwise() + moments.mean[static_cast<std::size_t>(n_steps)];
    }
    result.reversed_states.steps[static_cast<std::size_t>(n_steps)] = x_terminal;
    result.adjoints.steps[static_cast<std::size_t>(n_steps)] = prob.Q_f * x_terminal;
    result.gains.g1[static_cast<std::size_t>(n_steps)] =
        fit_gain(result.reversed_states.steps[static_cast<std::size_t>(n_steps)],
                 result.adjoints.steps[static_cast<std::size_t>(n_steps)]);

    for (int k = n_steps; k >= 1; --k) {
        const Eigen::MatrixXd& x = result.reversed_states.steps[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd& y = result.adjoints.steps[static_cast<std::size_t>(k)];
        // Gain from the regression at the current (later-time) point; the
        // fit at t_{k-1} only exists after this step.
        const Eigen::MatrixXd& gain = result.gains.g1[static_cast<std::size_t>(k)];

        const Eigen::MatrixXd centered = x.colwise() - moments.mean[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd score_drift =
            D * (moments.cov_inv[static_cast<std::size_t>(k)] * centered);
        const Eigen::MatrixXd u =
            feedback ? Eigen::MatrixXd((*feedback)[static_cast<std::size_t>(k)] * x)
                     : reversed_controls.steps[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd& dW = w_reversed.increments[static_cast<std::size_t>(k - 1)];

        result.reversed_states.steps[static_cast<std::size_t>(k - 1)] =
            x - (prob.A * x + prob.B * u + score_drift) * dt - prob.sigma * dW;
        result.adjoints.steps[static_cast<std::size_t>(k - 1)] =
            y + (prob.A.transpose() * y + prob.Q * x - gain * score_drift) * dt -
            gain * (prob.sigma * dW);

        check_finite_bounded(result.reversed_states.steps[static_cast<std::size_t>(k - 1)], iter,
                             k - 1, "backward_sweep (state)");
        check_finite_bounded(result.adjoints.steps[static_cast<std::size_t>(k - 1)], iter, k - 1,
                             "backward_sweep (adjoint)");

        try {
            result.gains.g1[static_cast<std::size_t>(k - 1)] =
                fit_gain(result.reversed_states.steps[static_cast<std::size_t>(k - 1)],
                         result.adjoints.steps[static_cast<std::size_t>(k - 1)]);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "backward_sweep: regression failed at step " << k - 1 << ": " << e.what();
            throw std::runtime_error(msg.str());
        }
    }
    return result;
}

void backward_pass(SolverState& state, const LqProblem& prob, const TimeGrid& grid,
                   const SolverConfig& cfg) {
    const Eigen::MatrixXd* terminal = nullptr;
    if (!cfg.resample_terminal) {
        terminal = &state.forward_states.steps.back();
    }
    BackwardResult result =
        backward_sweep(prob, grid, state.moments, state.reversed_controls, state.w_reversed,
                       cfg.seed, state.iter, terminal);
    state.reversed_states = std::move(result.reversed_states);
    state.adjoints = std::move(result.adjoints);
    state.gains = std::move(result.gains);
}

void control_update(SolverState& state, const LqProblem& prob, const TimeGrid& grid, double eta) {
    const Eigen::MatrixXd Bt = prob.B.transpose();
    for (int k = 0; k <= grid.n_steps; ++k) {
        const Eigen::MatrixXd y_forward =
            state.gains.g1[static_cast<std::size_t>(k)] *
            state.forward_states.steps[static_cast<std::size_t>(k)];
        Eigen::MatrixXd& u = state.forward_controls.steps[static_cast<std::size_t>(k)];
        u -= eta * (prob.R * u + Bt * y_forward);

        Eigen::MatrixXd& u_rev = state.reversed_controls.steps[static_cast<std::size_t>(k)];
        u_rev -= eta * (prob.R * u_rev + Bt * state.adjoints.steps[static_cast<std::size_t>(k)]);
    }
}

SolverOutput solve(const LqProblem& prob, const TimeGrid& grid, const SolverConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    SolverState state = init(prob, grid, cfg);

    SolverOutput out;
    out.config = cfg;
    for (int k = 1; k <= cfg.n_iters; ++k) {
        state.iter = k;
        try {
            forward_pass(state, prob, grid);
            state.moments = MomentSchedule::from_ensemble(state.forward_states);
            state.cost_history.push_back(
                cost_estimate(prob, state.forward_states, state.forward_controls, grid));
            backward_pass(state, prob, grid, cfg);
            control_update(state, prob, grid, cfg.step_size);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "solve: iteration " << k << ": " << e.what();
            throw std::runtime_error(msg.str());
        }
        if (cfg.record_history) out.gain_history.push_back(state.gains);
    }

    out.gains = std::move(state.gains);
    out.cost_history = std::move(state.cost_history);
    out.forward_states = std::move(state.forward_states);
    out.reversed_states = std::move(state.reversed_states);
    out.adjoints = std::move(state.adjoints);
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

std::vector<Eigen::MatrixXd> feedback_from_gains(const LqProblem& prob,
                                                 const GainSchedule& gains) {
    const Eigen::MatrixXd rinv_bt = prob.R.ldlt().solve(prob.B.transpose());
    std::vector<Eigen::MatrixXd> feedback;
    feedback.reserve(gains.g1.size());
    for (const auto& g : gains.g1) feedback.push_back(-rinv_bt * g);
    return feedback;
}

}  // namespace fbsde
