#pragma once

// Deterministic random number generation. Everything downstream (weight init,
// shuffling, item memories, synthetic data) goes through these helpers rather
// than <random> distributions, whose output is implementation-defined. Same
// seed, same bytes, on every platform.

#include <cmath>
#include <cstdint>
#include <vector>

namespace neurohd {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53 bits of mantissa.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Marsaglia polar method would need a cached spare; Box-Muller from two
    // fresh uniforms keeps the stream position predictable.
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::uint64_t bounded(std::uint64_t n) {
        return n == 0 ? 0 : next() % n;
    }
};

// Stateless avalanche mix for deriving independent streams from a master seed
// plus a key, e.g. (seed, level) for item memories or (seed, window) for
// synthetic signals.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t z = seed ^ (key + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2) {
    return mix_seed(mix_seed(seed, k1), k2);
}

template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace neurohd
