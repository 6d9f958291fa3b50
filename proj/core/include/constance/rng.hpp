#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace constance {

// splitmix64 finalizer; derives independent stream seeds from (seed, stream).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& engine) noexcept {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Inverse-CDF draw from a discrete distribution; zero-probability entries are
// never returned.
inline std::size_t sample_index(std::mt19937_64& engine, std::span<const double> probs) noexcept {
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < probs.size(); ++k)
        if (probs[k] > 0.0) last_positive = k;
    const double u = uniform01(engine);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        cumulative += probs[k];
        if (probs[k] > 0.0 && u < cumulative) return k;
    }
    return last_positive;
}

}  // namespace constance
