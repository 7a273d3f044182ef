#pragma once

namespace fbsde {

// Uniform grid t_k = k*dt, k = 0..n_steps, with n_steps*dt == horizon.
struct TimeGrid {
    double horizon = 0.0;
    double dt = 0.0;
    int n_steps = 0;

    double t(int k) const { return static_cast<double>(k) * dt; }
};

// Throws std::invalid_argument unless horizon/dt is an integer to within a
// few ulp (0.3/0.1 must pass) and both arguments are positive.
TimeGrid make_grid(double horizon, double dt);

}  // namespace fbsde
