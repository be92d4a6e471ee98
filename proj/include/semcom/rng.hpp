#pragma once

#include <cstdint>
#include <random>

namespace semcom {

// All randomness in the library flows through explicitly seeded generators.
using Rng = std::mt19937_64;

inline double gauss(Rng& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

/// Deterministic per-(seed, stream) sub-generator.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    r.discard(7);
    return r;
}

}  // namespace semcom
