#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fbsde {

// N sample trajectories of a vector process. steps[k] is dim x n_samples,
// column i = sample i at grid point t_k. Has n_steps + 1 entries.
struct Ensemble {
    std::vector<Eigen::MatrixXd> steps;

    int dim() const { return steps.empty() ? 0 : static_cast<int>(steps.front().rows()); }
    int n_samples() const { return steps.empty() ? 0 : static_cast<int>(steps.front().cols()); }
    int n_steps() const { return static_cast<int>(steps.size()) - 1; }

    static Ensemble zeros(int dim, int n_samples, int n_steps) {
        Ensemble e;
        e.steps.assign(static_cast<std::size_t>(n_steps) + 1,
                       Eigen::MatrixXd::Zero(dim, n_samples));
        return e;
    }

    bool all_finite() const {
        for (const auto& m : steps) {
            if (!m.allFinite()) return false;
        }
        return true;
    }
};

}  // namespace fbsde
