#pragma once

#include <cstdint>

namespace qchain {

// Small deterministic generator (splitmix64). Used instead of <random>
// distributions so that seeded runs are reproducible bit-for-bit across
// standard-library implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [-amplitude, amplitude].
    double next_symmetric(double amplitude) {
        return amplitude * (2.0 * next_double() - 1.0);
    }

    // Standard normal (Box-Muller, uses two draws).
    double next_normal();

private:
    std::uint64_t state_;
};

// Decorrelated stream for work item `index` of a seeded run.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qchain
