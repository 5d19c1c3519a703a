#ifndef CRISP_RNG_HPP
#define CRISP_RNG_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace crisp {

// splitmix64 step. Used for seeding and for deriving per-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Mixes a base seed with stream tags (level, node id, shard id, ...) so that
// independent consumers get decorrelated streams while staying reproducible
// and independent of processing order.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = seed;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t t : tags) {
        state ^= t * 0xff51afd7ed558ccdull;
        out = splitmix64(state);
    }
    return out;
}

// xoshiro256++ with explicit distribution code. The standard library engines
// are portable but its distributions are not; every draw here is fully
// specified so identical seeds give identical streams on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased (bitmask rejection).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t mask = ~0ull >> std::countl_zero(n - 1);
        std::uint64_t x;
        do {
            x = next() & mask;
        } while (x >= n);
        return x;
    }

    // Standard normal via Box-Muller. Two uniforms per call, no cached spare.
    double gaussian() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace crisp

#endif  // CRISP_RNG_HPP
