#pragma once

#include <cstdint>
#include <random>

namespace vf {

// splitmix64; used to derive independent per-episode seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [lo, hi] from the top 53 bits of the engine output.
// Hand-rolled so sequences do not depend on the standard library vendor.
inline double uniform_double(std::mt19937_64& rng, double lo, double hi) {
    const double u = (rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

inline double normal_double(std::mt19937_64& rng, double mean, double stddev) {
    // Box-Muller, one draw per call; deterministic across vendors.
    double u1 = uniform_double(rng, 0.0, 1.0);
    double u2 = uniform_double(rng, 0.0, 1.0);
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace vf
