#include "fbsde/experiment.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace fbsde {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw ConfigError("config: field '" + field + "' must be a nested array of rows");
    }
    const auto rows = j.size();
    const auto cols = j.front().size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ConfigError("config: field '" + field + "' has ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) {
                throw ConfigError("config: field '" + field + "' has a non-numeric entry");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_number()) {
        throw ConfigError("config: field '" + field + "' must be a flat numeric array");
    }
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

const json& require_field(const json& j, const std::string& key, const std::string& scope) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError("config: missing required field '" + scope + key + "'");
    }
    return *it;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

int worker_count(int n_repeats) {
    int cap = 0;
    if (const char* env = std::getenv("FBSDE_THREADS")) {
        cap = std::atoi(env);
    }
    if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0) cap = 1;
    return std::min(cap, n_repeats);
}

struct RepeatResults {
    std::vector<std::optional<SolverOutput>> outputs;
    std::vector<std::string> errors;
};

RepeatResults run_repeats(const ExperimentConfig& cfg, const TimeGrid& grid) {
    RepeatResults results;
    results.outputs.resize(static_cast<std::size_t>(cfg.n_repeats));
    results.errors.resize(static_cast<std::size_t>(cfg.n_repeats));

    const int workers = worker_count(cfg.n_repeats);
    auto run_range = [&](int worker) {
        for (int r = worker; r < cfg.n_repeats; r += workers) {
            SolverConfig scfg = cfg.solver;
            scfg.seed = cfg.solver.seed + static_cast<std::uint64_t>(r);
            try {
                results.outputs[static_cast<std::size_t>(r)] = solve(cfg.problem, grid, scfg);
            } catch (const std::exception& e) {
                results.errors[static_cast<std::size_t>(r)] = e.what();
            }
        }
    };

    if (workers <= 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& t : pool) t.join();
    }
    return results;
}

GainSchedule average_gains(const RepeatResults& results, int n_steps, int n) {
    GainSchedule avg;
    avg.g1.assign(static_cast<std::size_t>(n_steps) + 1, Eigen::MatrixXd::Zero(n, n));
    int count = 0;
    for (const auto& out : results.outputs) {
        if (!out) continue;
        ++count;
        for (int k = 0; k <= n_steps; ++k) {
            avg.g1[static_cast<std::size_t>(k)] += out->gains.g1[static_cast<std::size_t>(k)];
        }
    }
    for (auto& g : avg.g1) g /= static_cast<double>(count);
    return avg;
}

}  // namespace

ExperimentConfig mass_spring_preset() {
    ExperimentConfig cfg;
    cfg.problem = LqProblem::mass_spring();
    cfg.horizon = 1.0;
    cfg.dt = 0.02;
    cfg.solver.n_samples = 1000;
    cfg.solver.n_iters = 75;
    cfg.solver.step_size = 0.02;
    cfg.solver.seed = 0;
    cfg.n_repeats = 1;
    cfg.n_trajectory_samples = 20;
    cfg.output_dir = "out";
    return cfg;
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    const json& prob = require_field(j, "problem", "");
    cfg.problem.A = parse_matrix(require_field(prob, "A", "problem."), "problem.A");
    cfg.problem.B = parse_matrix(require_field(prob, "B", "problem."), "problem.B");
    cfg.problem.sigma = parse_matrix(require_field(prob, "sigma", "problem."), "problem.sigma");
    cfg.problem.Q = parse_matrix(require_field(prob, "Q", "problem."), "problem.Q");
    cfg.problem.R = parse_matrix(require_field(prob, "R", "problem."), "problem.R");
    cfg.problem.Q_f = parse_matrix(require_field(prob, "Q_f", "problem."), "problem.Q_f");
    cfg.problem.m0 = parse_vector(require_field(prob, "m0", "problem."), "problem.m0");
    cfg.problem.Sigma0 = parse_matrix(require_field(prob, "Sigma0", "problem."), "problem.Sigma0");

    if (auto it = j.find("grid"); it != j.end()) {
        cfg.horizon = it->value("horizon", 1.0);
        cfg.dt = it->value("dt", 0.02);
    }
    cfg.problem.horizon = cfg.horizon;

    if (auto it = j.find("solver"); it != j.end()) {
        cfg.solver.n_samples = it->value("n_samples", cfg.solver.n_samples);
        cfg.solver.n_iters = it->value("n_iters", cfg.solver.n_iters);
        cfg.solver.step_size = it->value("step_size", cfg.solver.step_size);
        cfg.solver.seed = it->value("seed", cfg.solver.seed);
        cfg.solver.record_history = it->value("record_history", cfg.solver.record_history);
        cfg.solver.resample_terminal =
            it->value("resample_terminal", cfg.solver.resample_terminal);
    }
    cfg.n_repeats = j.value("n_repeats", 1);
    cfg.n_trajectory_samples = j.value("n_trajectory_samples", 20);
    cfg.output_dir = j.value("output_dir", std::string("out"));

    if (cfg.n_repeats < 1) throw ConfigError("config: n_repeats must be >= 1");
    if (cfg.n_trajectory_samples < 1) {
        throw ConfigError("config: n_trajectory_samples must be >= 1");
    }
    try {
        cfg.problem.validate();
        (void)make_grid(cfg.horizon, cfg.dt);
        if (cfg.solver.n_samples < 2) throw std::invalid_argument("solver.n_samples must be >= 2");
        if (cfg.solver.n_iters < 1) throw std::invalid_argument("solver.n_iters must be >= 1");
        if (!(cfg.solver.step_size >= 0.0)) {
            throw std::invalid_argument("solver.step_size must be >= 0");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    json j;
    j["problem"] = {{"A", matrix_to_json(cfg.problem.A)},
                    {"B", matrix_to_json(cfg.problem.B)},
                    {"sigma", matrix_to_json(cfg.problem.sigma)},
                    {"Q", matrix_to_json(cfg.problem.Q)},
                    {"R", matrix_to_json(cfg.problem.R)},
                    {"Q_f", matrix_to_json(cfg.problem.Q_f)},
                    {"m0", vector_to_json(cfg.problem.m0)},
                    {"Sigma0", matrix_to_json(cfg.problem.Sigma0)}};
    j["grid"] = {{"horizon", cfg.horizon}, {"dt", cfg.dt}};
    j["solver"] = {{"n_samples", cfg.solver.n_samples},
                   {"n_iters", cfg.solver.n_iters},
                   {"step_size", cfg.solver.step_size},
                   {"seed", cfg.solver.seed},
                   {"record_history", cfg.solver.record_history},
                   {"resample_terminal", cfg.solver.resample_terminal}};
    j["n_repeats"] = cfg.n_repeats;
    j["n_trajectory_samples"] = cfg.n_trajectory_samples;
    j["output_dir"] = cfg.output_dir;
    return j;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write '" + path + "'");
    out << to_json(cfg).dump(2) << "\n";
}

OracleReport compare_gains(const GainSchedule& estimated, const GainSchedule& oracle,
                           const TimeGrid& grid) {
    if (estimated.g1.size() != oracle.g1.size()) {
        throw std::invalid_argument("compare_gains: schedules differ in length");
    }
    OracleReport report;
    double sq_interior = 0.0;
    double sq_all = 0.0;
    std::size_t count_interior = 0;
    std::size_t count_all = 0;
    for (int k = 0; k <= grid.n_steps; ++k) {
        const Eigen::MatrixXd diff =
            estimated.g1[static_cast<std::size_t>(k)] - oracle.g1[static_cast<std::size_t>(k)];
        report.t.push_back(grid.t(k));
        report.diff.push_back(diff);
        const double sq = diff.squaredNorm();
        sq_all += sq;
        count_all += static_cast<std::size_t>(diff.size());
        if (k <= grid.n_steps - 2) {
            sq_interior += sq;
            count_interior += static_cast<std::size_t>(diff.size());
        }
    }
    report.rms_full = std::sqrt(sq_all / static_cast<double>(count_all));
    report.rms = count_interior > 0
                     ? std::sqrt(sq_interior / static_cast<double>(count_interior))
                     : report.rms_full;
    return report;
}

OracleReport compare_oracle(const ExperimentConfig& cfg) {
    const TimeGrid grid = make_grid(cfg.horizon, cfg.dt);
    const RepeatResults results = run_repeats(cfg, grid);
    bool any = false;
    for (const auto& out : results.outputs) any = any || out.has_value();
    if (!any) {
        throw std::runtime_error("compare_oracle: all repeats failed: " + results.errors.front());
    }
    const GainSchedule avg = average_gains(results, grid.n_steps, cfg.problem.state_dim());
    return compare_gains(avg, riccati_solve(cfg.problem, grid), grid);
}

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    const TimeGrid grid = make_grid(cfg.horizon, cfg.dt);
    const int n = cfg.problem.state_dim();

    const RepeatResults results = run_repeats(cfg, grid);

    int n_ok = 0;
    const SolverOutput* first_ok = nullptr;
    for (const auto& out : results.outputs) {
        if (out) {
            ++n_ok;
            if (!first_ok) first_ok = &*out;
        }
    }
    if (n_ok == 0) {
        std::string detail;
        for (const auto& e : results.errors) {
            if (!e.empty()) {
                detail = e;
                break;
            }
        }
        throw std::runtime_error("run_experiment: all repeats failed: " + detail);
    }

    const GainSchedule avg = average_gains(results, grid.n_steps, n);
    const GainSchedule oracle = riccati_solve(cfg.problem, grid);
    const OracleReport report = compare_gains(avg, oracle, grid);

    std::filesystem::create_directories(cfg.output_dir);
    RunArtifacts artifacts;
    artifacts.gains_csv = cfg.output_dir + "/gains.csv";
    artifacts.cost_csv = cfg.output_dir + "/cost.csv";
    artifacts.trajectories_csv = cfg.output_dir + "/trajectories.csv";
    artifacts.summary_json = cfg.output_dir + "/summary.json";
    artifacts.n_failed_repeats = cfg.n_repeats - n_ok;
    artifacts.gain_rms_error = report.rms;

    {
        std::ofstream out(artifacts.gains_csv, std::ios::binary);
        out << "t";
        for (int r = 1; r <= n; ++r) {
            for (int c = 1; c <= n; ++c) out << ",g" << r << c;
        }
        for (int r = 1; r <= n; ++r) {
            for (int c = 1; c <= n; ++c) out << ",ric" << r << c;
        }
        out << "\n";
        for (int k = 0; k <= grid.n_steps; ++k) {
            out << fmt(grid.t(k));
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) {
                    out << "," << fmt(avg.g1[static_cast<std::size_t>(k)](r, c));
                }
            }
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) {
                    out << "," << fmt(oracle.g1[static_cast<std::size_t>(k)](r, c));
                }
            }
            out << "\n";
        }
    }

    double final_cost_sum = 0.0;
    {
        std::ofstream out(artifacts.cost_csv, std::ios::binary);
        out << "repeat,iteration,cost\n";
        for (int r = 0; r < cfg.n_repeats; ++r) {
            const auto& maybe = results.outputs[static_cast<std::size_t>(r)];
            if (!maybe) continue;
            for (std::size_t it = 0; it < maybe->cost_history.size(); ++it) {
                out << r << "," << (it + 1) << "," << fmt(maybe->cost_history[it]) << "\n";
            }
            final_cost_sum += maybe->cost_history.back();
        }
    }
    artifacts.final_cost = final_cost_sum / static_cast<double>(n_ok);

    {
        // First component of X, X_rev, Y_rev for a fixed leading subset of
        // samples from the first successful repeat.
        std::ofstream out(artifacts.trajectories_csv, std::ios::binary);
        out << "sample,t,x1,xrev1,yrev1\n";
        const int n_traj = std::min(cfg.n_trajectory_samples, cfg.solver.n_samples);
        for (int i = 0; i < n_traj; ++i) {
            for (int k = 0; k <= grid.n_steps; ++k) {
                out << i << "," << fmt(grid.t(k)) << ","
                    << fmt(first_ok->forward_states.steps[static_cast<std::size_t>(k)](0, i)) << ","
                    << fmt(first_ok->reversed_states.steps[static_cast<std::size_t>(k)](0, i))
                    << "," << fmt(first_ok->adjoints.steps[static_cast<std::size_t>(k)](0, i))
                    << "\n";
            }
        }
    }

    artifacts.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    {
        json summary;
        summary["seed"] = cfg.solver.seed;
        summary["config_hash"] = fnv1a(to_json(cfg).dump());
        summary["wall_time_s"] = artifacts.wall_time_s;
        summary["final_cost"] = artifacts.final_cost;
        summary["gain_rms_error"] = artifacts.gain_rms_error;
        summary["gain_rms_error_full"] = report.rms_full;
        summary["n_repeats"] = cfg.n_repeats;
        summary["n_failed_repeats"] = artifacts.n_failed_repeats;
        json errors = json::array();
        for (const auto& e : results.errors) {
            if (!e.empty()) errors.push_back(e);
        }
        summary["repeat_errors"] = errors;
        std::ofstream out(artifacts.summary_json, std::ios::binary);
        out << summary.dump(2) << "\n";
    }
    return artifacts;
}

}  // namespace fbsde
