#pragma once

#include <cstdint>
#include <random>

namespace sparsedom {

/// SplitMix64 finalizer; used to derive well-separated seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seedable 64-bit generator (Mersenne Twister mt19937_64).
// Uniform and normal variates are derived by hand so that streams are
// identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    /// Independent substream number `counter` of a base seed.
    static Rng substream(std::uint64_t seed, std::uint64_t counter);

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sparsedom
