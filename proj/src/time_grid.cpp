#include "fbsde/time_grid.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fbsde {

TimeGrid make_grid(double horizon, double dt) {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("make_grid: horizon must be > 0");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("make_grid: dt must be > 0");
    }
    const double q = horizon / dt;
    const double n = std::round(q);
    // Tolerate the rounding of ratios like 0.3/0.1 (a couple ulp off an
    // integer) but reject genuinely non-divisible horizons.
    const double tol = 8.0 * std::numeric_limits<double>::epsilon() * std::max(q, 1.0);
    if (n < 1.0 || std::abs(q - n) > tol) {
        std::ostringstream msg;
        msg << "make_grid: horizon " << horizon << " is not an integer multiple of dt "
            << dt << " (horizon/dt = " << q << ")";
        throw std::invalid_argument(msg.str());
    }
    TimeGrid grid;
    grid.horizon = horizon;
    grid.dt = dt;
    grid.n_steps = static_cast<int>(n);
    return grid;
}

}  // namespace fbsde
