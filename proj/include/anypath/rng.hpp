#pragma once

#include <cstdint>

namespace anypath {

// Deterministic, platform-independent random source: xoshiro256** seeded via
// splitmix64. Reports derived from a seed are bit-identical everywhere, which
// is why std::uniform_real_distribution (implementation-defined) is not used.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_)
            word = splitmix64_next(sm);
    }

    // Stream derivation: stream k of a seed is Rng(splitmix64 hash of
    // (seed, k)). Distinct (seed, stream) pairs give independent sequences,
    // so per-trial streams make parallel runs schedule-independent.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
        std::uint64_t sm = seed ^ (0x9e3779b97f4a7c15ULL * (stream_index + 1));
        return Rng(splitmix64_next(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace anypath
