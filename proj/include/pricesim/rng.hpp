#pragma once

#include <cmath>
#include <cstdint>

namespace pricesim {

// splitmix64 finalizer; bit-exact on every platform we care about.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Counter-based deterministic random stream. A substream is addressed by
/// (seed, stream, counter), so per-round draws can be derived independently
/// of how many draws earlier rounds consumed.
class Substream {
public:
    Substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0)
        : state_(mix64(mix64(seed ^ 0x6a09e667f3bcc908ull) + stream) + mix64(counter ^ 0xbb67ae8584caa73bull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform01(); }

    /// Standard normal via Box-Muller (portable; std::normal_distribution is
    /// implementation-defined and would break cross-platform reproducibility).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        double u2 = next_uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Derives the seed for repeat `r` of a base experiment seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(mix64(base) ^ (0x9e3779b97f4a7c15ull * (index + 1)));
}

} // namespace pricesim
