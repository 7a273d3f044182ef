#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fbsde/rng.hpp"
#include "fbsde/time_grid.hpp"

namespace fbsde {

// Brownian increments for an ensemble. increments[k] is dim x n_samples;
// column i holds the increment of sample i over [t_k, t_{k+1}], each
// coordinate N(0, dt). Frozen after construction and reused across solver
// iterations.
struct WienerEnsemble {
    std::vector<Eigen::MatrixXd> increments;
    double dt = 0.0;
    std::uint64_t seed = 0;

    int dim() const { return increments.empty() ? 0 : static_cast<int>(increments.front().rows()); }
    int n_samples() const { return increments.empty() ? 0 : static_cast<int>(increments.front().cols()); }
    int n_steps() const { return static_cast<int>(increments.size()); }
};

// Deterministic given (seed, domain): per-(sample, step) counter-based
// streams, so generation order never affects the draws.
WienerEnsemble sample_wiener(const TimeGrid& grid, int dim, int n_samples, std::uint64_t seed,
                             RngDomain domain = RngDomain::wiener_forward);

// Increments of W~_t = W_{T-t} - W_T: increment k of the output is the
// negation of increment n_steps-1-k of the input. An involution.
WienerEnsemble reversal_transform(const WienerEnsemble& paths);

}  // namespace fbsde
