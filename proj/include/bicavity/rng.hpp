#pragma once

// SplitMix64: a small, seedable, portable 64-bit generator.  Ensemble runs
// give each particle its own stream derived from the run seed, so results are
// bit-reproducible independent of particle count or evaluation order.

#include <cstdint>
#include <cmath>

#include "bicavity/core.hpp"

namespace bicavity {

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (deterministic, no cached spare).
    double next_normal() {
        double u1 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Decorrelated substream for element `index` of a seeded collection.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
    }

  private:
    std::uint64_t state_;
};

}  // namespace bicavity
