#include "fbsde/regression.hpp"

#include <stdexcept>

namespace fbsde {

Eigen::MatrixXd fit_gain(const Eigen::MatrixXd& states, const Eigen::MatrixXd& adjoints) {
    const int n = static_cast<int>(states.rows());
    const int N = static_cast<int>(states.cols());
    if (adjoints.rows() != n || adjoints.cols() != N) {
        throw std::invalid_argument("fit_gain: states and adjoints must share shape n x N");
    }
    if (N < n) throw std::invalid_argument("fit_gain: need at least n samples");

    const double norm = 1.0 / static_cast<double>(N);
    const Eigen::MatrixXd sxx = (states * states.transpose()) * norm;
    const Eigen::MatrixXd syx = (adjoints * states.transpose()) * norm;
    // Tiny ridge only to guard degeneracy; small enough that exact linear
    // relations are recovered to ~1e-12 relative.
    const double eps = 1e-12 * std::max(sxx.trace() / static_cast<double>(n), 1.0);
    const Eigen::MatrixXd reg = sxx + eps * Eigen::MatrixXd::Identity(n, n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    Eigen::MatrixXd gain = ldlt.solve(syx.transpose()).transpose();
    if (ldlt.info() != Eigen::Success || !gain.allFinite()) {
        throw std::runtime_error("fit_gain: degenerate sample second-moment matrix");
    }
    return gain;
}

}  // namespace fbsde
