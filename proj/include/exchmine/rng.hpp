#pragma once

#include <cstdint>

namespace exchmine {

// splitmix64; used for seeding and stream derivation.
inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (base, a, b). The chain samplers
// give every parallel chain its own stream so results do not depend on
// scheduling.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    uint64_t st = base;
    st ^= splitmix64_next(st) + 0x9E3779B97F4A7C15ull * (a + 1);
    st ^= splitmix64_next(st) + 0xD1B54A32D192ED03ull * (b + 1);
    return splitmix64_next(st);
}

// Stream tags; keep values stable, they are part of reproducibility.
namespace seed_tag {
constexpr uint64_t backward_chain = 1;
constexpr uint64_t forward_chain = 2;
constexpr uint64_t convergence = 3;
constexpr uint64_t statistic = 4;
constexpr uint64_t holdout = 5;
constexpr uint64_t kmeans_restart = 6;
constexpr uint64_t synthetic = 7;
constexpr uint64_t session_iteration = 8;
}  // namespace seed_tag

// xoshiro256++ with splitmix64 seeding. Bounded draws and uniform doubles are
// implemented here instead of <random> distributions so that identical seeds
// give identical streams on every platform/stdlib.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64_next(sm);
    }

    uint64_t next() {
        uint64_t& s0 = state_[0];
        uint64_t& s1 = state_[1];
        uint64_t& s2 = state_[2];
        uint64_t& s3 = state_[3];
        const uint64_t result = rotl(s0 + s3, 23) + s0;
        const uint64_t t = s1 << 17;
        s2 ^= s0;
        s3 ^= s1;
        s1 ^= s2;
        s0 ^= s3;
        s2 ^= t;
        s3 = rotl(s3, 45);
        return result;
    }

    // Unbiased integer in [0, n). Lemire's multiply-shift with rejection.
    uint64_t below(uint64_t n) {
        uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        uint64_t low = static_cast<uint64_t>(m);
        if (low < n) {
            const uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

}  // namespace exchmine
