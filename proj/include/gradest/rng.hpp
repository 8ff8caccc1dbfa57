#pragma once

#include <cstdint>

namespace gradest {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Counter-based uniform variate on the open interval (0,1).
//
// Every (seed, trial, draw) triple maps to one fixed double, so results do
// not depend on thread scheduling or evaluation order. The +0.5 offset keeps
// the value strictly inside (0,1): inverse-CDF samplers reject {0,1}.
inline double uniform01(std::uint64_t seed, std::uint64_t trial, std::uint64_t draw) {
    const std::uint64_t h = mix64(draw + mix64(trial + mix64(seed)));
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// All variates of one Monte Carlo trial, indexed by draw.
struct TrialStream {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;

    double u(std::uint64_t draw) const { return uniform01(seed, trial, draw); }
};

} // namespace gradest
