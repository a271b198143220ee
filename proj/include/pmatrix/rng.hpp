#pragma once

#include <cstdint>

// Seeded, bit-stable randomness helpers. Parallel work derives per-index
// substreams from a master seed (substream_seed), so results never depend
// on worker count or scheduling.

namespace pmatrix::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Substream k of a master seed: mix the index in with an odd constant so
// nearby indices land far apart.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

// Small xoshiro-free PRNG: splitmix64 used as a counter-less stream.
// std::mt19937_64 would also do, but this is a fraction of the state and
// guaranteed identical on every platform.
class Engine {
public:
    explicit Engine(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound; // 2^64 mod bound
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % bound;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

private:
    std::uint64_t state_;
};

} // namespace pmatrix::rng
