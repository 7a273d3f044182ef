#pragma once

#include <cmath>
#include <cstdint>

namespace fbsde {

// splitmix64: sequential 64-bit generator, one multiply-xor chain per draw.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream domains: one per independent consumer of randomness, so that
// e.g. forward and reversed Wiener ensembles never share stream positions.
enum class RngDomain : std::uint64_t {
    initial_state = 1,
    wiener_forward = 2,
    wiener_reversed = 3,
    terminal_resample = 4,
    test = 99,
};

// Counter-based stream keyed by (seed, domain, a, b). Draws for distinct
// (a, b) pairs come from statistically independent positions, which makes
// per-(sample, step) generation order-independent and reproducible.
class RngStream {
public:
    RngStream(std::uint64_t seed, RngDomain domain, std::uint64_t a, std::uint64_t b = 0) {
        state_ = seed;
        (void)splitmix64(state_);
        state_ ^= (static_cast<std::uint64_t>(domain) + 1) * 0x9e3779b97f4a7c15ULL;
        (void)splitmix64(state_);
        state_ ^= (a + 1) * 0xd1b54a32d192ed03ULL;
        (void)splitmix64(state_);
        state_ ^= (b + 1) * 0x8cb92ba72f3d8dd7ULL;
        (void)splitmix64(state_);
    }

    // Uniform in (0, 1]; never returns 0 so log() below is safe.
    double uniform() {
        return static_cast<double>((splitmix64(state_) >> 11) + 1) * 0x1p-53;
    }

    // Standard normal via Box-Muller (both branches used).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fbsde
