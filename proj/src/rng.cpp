#include "qchain/rng.hpp"

#include <cmath>

namespace qchain {

double SplitMix64::next_normal() {
    // Box-Muller; guard the log against a zero draw.
    double a = next_double();
    double b = next_double();
    if (a <= 0.0) a = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(a)) * std::cos(6.283185307179586477 * b);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed ^ (0x632be59bd9b4e019ULL * (index + 1)));
    return mix.next_u64();
}

}  // namespace qchain
