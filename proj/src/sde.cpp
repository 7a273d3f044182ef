#include "fbsde/sde.hpp"

#include <sstream>
#include <stdexcept>

namespace fbsde {

namespace {

void check_step_shapes(const Eigen::VectorXd& x, const Eigen::VectorXd& drift,
                       const Eigen::MatrixXd& sigma, const Eigen::VectorXd& dW,
                       const char* who) {
    if (drift.size() != x.size() || sigma.rows() != x.size() || sigma.cols() != dW.size()) {
        std::ostringstream msg;
        msg << who << ": inconsistent shapes (x " << x.size() << ", drift " << drift.size()
            << ", sigma " << sigma.rows() << "x" << sigma.cols() << ", dW " << dW.size() << ")";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

Eigen::VectorXd forward_euler_step(const Eigen::VectorXd& x, const Eigen::VectorXd& drift,
                                   const Eigen::MatrixXd& sigma, const Eigen::VectorXd& dW,
                                   double dt) {
    check_step_shapes(x, drift, sigma, dW, "forward_euler_step");
    Eigen::VectorXd out = x + drift * dt + sigma * dW;
    if (!out.allFinite()) {
        throw std::runtime_error("forward_euler_step: non-finite state");
    }
    return out;
}

Eigen::VectorXd backward_euler_step(const Eigen::VectorXd& x, const Eigen::VectorXd& drift,
                                    const Eigen::MatrixXd& sigma, const Eigen::VectorXd& dW,
                                    double dt) {
    check_step_shapes(x, drift, sigma, dW, "backward_euler_step");
    Eigen::VectorXd out = x - drift * dt - sigma * dW;
    if (!out.allFinite()) {
        throw std::runtime_error("backward_euler_step: non-finite state");
    }
    return out;
}

Eigen::MatrixXd backward_integral(const Ensemble& integrand, const WienerEnsemble& paths,
                                  int from_step) {
    const int n = paths.n_steps();
    if (integrand.n_steps() != n || integrand.dim() != paths.dim() ||
        integrand.n_samples() != paths.n_samples()) {
        throw std::invalid_argument("backward_integral: integrand shape does not match paths");
    }
    if (from_step < 0 || from_step > n) {
        throw std::invalid_argument("backward_integral: from_step out of range");
    }
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(integrand.dim(), integrand.n_samples());
    for (int k = from_step; k < n; ++k) {
        acc += integrand.steps[static_cast<std::size_t>(k + 1)]
                   .cwiseProduct(paths.increments[static_cast<std::size_t>(k)]);
    }
    return acc;
}

}  // namespace fbsde
