#include "fbsde/wiener.hpp"

#include <cmath>
#include <stdexcept>

namespace fbsde {

WienerEnsemble sample_wiener(const TimeGrid& grid, int dim, int n_samples, std::uint64_t seed,
                             RngDomain domain) {
    if (dim < 1) throw std::invalid_argument("sample_wiener: dim must be >= 1");
    if (n_samples < 1) throw std::invalid_argument("sample_wiener: n_samples must be >= 1");

    WienerEnsemble w;
    w.dt = grid.dt;
    w.seed = seed;
    w.increments.resize(static_cast<std::size_t>(grid.n_steps));
    const double scale = std::sqrt(grid.dt);
    for (int k = 0; k < grid.n_steps; ++k) {
        Eigen::MatrixXd inc(dim, n_samples);
        for (int i = 0; i < n_samples; ++i) {
            RngStream stream(seed, domain, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(k));
            for (int j = 0; j < dim; ++j) {
                inc(j, i) = scale * stream.gaussian();
            }
        }
        w.increments[static_cast<std::size_t>(k)] = std::move(inc);
    }
    return w;
}

WienerEnsemble reversal_transform(const WienerEnsemble& paths) {
    WienerEnsemble out;
    out.dt = paths.dt;
    out.seed = paths.seed;
    const int n = paths.n_steps();
    out.increments.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        out.increments[static_cast<std::size_t>(k)] =
            -paths.increments[static_cast<std::size_t>(n - 1 - k)];
    }
    return out;
}

}  // namespace fbsde
