#pragma once

// Deterministic random streams. xoshiro256++ seeded through splitmix64,
// with a stream derivation scheme so that every simulation replicate and
// every bootstrap draw owns an independent generator regardless of how the
// work is scheduled across threads. Normal variates go through the inverse
// CDF, keeping output identical across platforms and thread counts.

#include <cstdint>
#include <initializer_list>

#include "copred/gauss.hpp"

namespace copred {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    // Derives an independent stream from a root seed and a path of indices
    // (experiment id, replicate, purpose, ...).
    static Rng stream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
        std::uint64_t sm = root;
        std::uint64_t mixed = splitmix64(sm);
        for (std::uint64_t p : path) {
            sm = mixed ^ (p + 0x9e3779b97f4a7c15ULL);
            mixed = splitmix64(sm);
        }
        return Rng(mixed);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1).
    double uniform() {
        return ((next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal through the quantile function.
    double normal() { return norm_quantile(uniform()); }

    // Uniform integer on [0, n), unbiased by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace copred
