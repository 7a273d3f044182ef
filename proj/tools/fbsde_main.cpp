#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fbsde/experiment.hpp"

namespace {

// Exit codes: 0 success, 2 config error, 3 numerical failure.
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int run_oracle_only(const fbsde::ExperimentConfig& cfg) {
    const fbsde::TimeGrid grid = fbsde::make_grid(cfg.horizon, cfg.dt);
    const fbsde::GainSchedule oracle = fbsde::riccati_solve(cfg.problem, grid);
    const double optimal_cost = fbsde::optimal_cost_oracle(cfg.problem, grid);

    std::filesystem::create_directories(cfg.output_dir);
    const std::string path = cfg.output_dir + "/oracle_gains.csv";
    std::ofstream out(path, std::ios::binary);
    const int n = cfg.problem.state_dim();
    out << "t";
    for (int r = 1; r <= n; ++r) {
        for (int c = 1; c <= n; ++c) out << ",ric" << r << c;
    }
    out << "\n";
    for (int k = 0; k <= grid.n_steps; ++k) {
        out << fmt(grid.t(k));
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                out << "," << fmt(oracle.g1[static_cast<std::size_t>(k)](r, c));
            }
        }
        out << "\n";
    }
    std::cout << "oracle gains written to " << path << "\n";
    std::cout << "optimal cost J* = " << optimal_cost << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Monte-Carlo solver for linear-quadratic stochastic optimal control via "
        "simultaneous simulation of the adjoint FBSDE and its time-reversal"};

    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
    std::optional<int> iters;
    std::optional<double> dt;
    std::optional<int> repeats;
    std::optional<std::string> output_dir;
    bool oracle_only = false;

    app.add_option("--config", config_path, "Path to a JSON experiment config");
    app.add_option("--preset", preset, "Built-in problem preset (mass-spring)");
    app.add_option("--seed", seed, "Master seed (overrides config)");
    app.add_option("--samples", samples, "Number of Monte-Carlo samples N (overrides config)");
    app.add_option("--iters", iters, "Number of solver iterations (overrides config)");
    app.add_option("--dt", dt, "Time step (overrides config)");
    app.add_option("--repeats", repeats, "Independent repeats with consecutive seeds");
    app.add_option("--output-dir", output_dir, "Directory for CSV and summary outputs");
    app.add_flag("--oracle-only", oracle_only, "Solve the Riccati equation, write gains, exit");

    CLI11_PARSE(app, argc, argv);

    fbsde::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = fbsde::load_config(config_path);
        } else if (preset == "mass-spring") {
            cfg = fbsde::mass_spring_preset();
        } else if (preset.empty()) {
            std::cerr << "error: provide --config PATH or --preset mass-spring\n";
            return kExitConfigError;
        } else {
            std::cerr << "error: unknown preset '" << preset << "'\n";
            return kExitConfigError;
        }

        if (seed) cfg.solver.seed = *seed;
        if (samples) cfg.solver.n_samples = *samples;
        if (iters) cfg.solver.n_iters = *iters;
        if (dt) cfg.dt = *dt;
        if (repeats) cfg.n_repeats = *repeats;
        if (output_dir) cfg.output_dir = *output_dir;

        // Revalidate after flag overrides.
        cfg = fbsde::parse_config(fbsde::to_json(cfg));
    } catch (const fbsde::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        if (oracle_only) {
            return run_oracle_only(cfg);
        }
        const fbsde::RunArtifacts artifacts = fbsde::run_experiment(cfg);
        std::cout << "gains:        " << artifacts.gains_csv << "\n"
                  << "cost:         " << artifacts.cost_csv << "\n"
                  << "trajectories: " << artifacts.trajectories_csv << "\n"
                  << "summary:      " << artifacts.summary_json << "\n"
                  << "final cost " << artifacts.final_cost << ", gain RMS error vs oracle "
                  << artifacts.gain_rms_error << " (" << artifacts.wall_time_s << " s)\n";
        if (artifacts.n_failed_repeats > 0) {
            std::cerr << "warning: " << artifacts.n_failed_repeats
                      << " repeat(s) failed; see summary\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream diag(cfg.output_dir + "/diagnostics.txt");
        diag << e.what() << "\n";
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalError;
    }
}
