#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbsde/lq_model.hpp"
#include "fbsde/riccati.hpp"
#include "fbsde/solver.hpp"
#include "fbsde/time_grid.hpp"

namespace fbsde {

// Configuration or validation problem; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    LqProblem problem;
    double horizon = 1.0;
    double dt = 0.02;
    SolverConfig solver;
    int n_repeats = 1;
    int n_trajectory_samples = 20;
    std::string output_dir = "out";
};

struct RunArtifacts {
    std::string gains_csv;
    std::string cost_csv;
    std::string trajectories_csv;
    std::string summary_json;
    double final_cost = 0.0;      // mean over successful repeats of the last iterate
    double gain_rms_error = 0.0;  // vs. the Riccati oracle over t in [0, T - 2 dt]
    double wall_time_s = 0.0;
    int n_failed_repeats = 0;
};

// Per-grid-point entrywise difference between an estimated gain schedule
// and the Riccati oracle. rms excludes the last two grid points.
struct OracleReport {
    std::vector<double> t;
    std::vector<Eigen::MatrixXd> diff;
    double rms = 0.0;
    double rms_full = 0.0;
};

ExperimentConfig mass_spring_preset();

// JSON round trip. parse_config and load_config throw ConfigError with a
// field-level message on parse errors, dimension mismatches or invariant
// violations.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// Runs solve() for seeds seed, seed+1, ..., seed+n_repeats-1 (repeats may
// execute on worker threads, FBSDE_THREADS caps the count) and writes
// gains.csv / cost.csv / trajectories.csv / summary.json under output_dir.
// Individual repeat failures are recorded; throws only when all fail.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

// Entrywise comparison of a gain schedule against riccati_solve.
OracleReport compare_gains(const GainSchedule& estimated, const GainSchedule& oracle,
                           const TimeGrid& grid);

// Runs the repeats of cfg, averages the final gain schedules, and compares
// against the Riccati oracle.
OracleReport compare_oracle(const ExperimentConfig& cfg);

}  // namespace fbsde
