#pragma once

#include <cstdint>

#include "util.hpp"

namespace tprefsim {

// 64-bit LCG (MMIX constants). Each consumer owns its own instance so the
// draw order of one subsystem cannot perturb another; everything downstream
// of a seed is reproducible.
class Lcg64 {
public:
    explicit Lcg64(uint64_t seed = 0) : state_(mix64(seed)) {}

    uint64_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_;
    }

    // Uniform in [0, 1), 53 bits.
    double next_unit() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Uniform in [0, bound) by multiply-shift on the high bits. The low bits
    // of an LCG have short periods (bit k repeats every 2^(k+1) draws), so a
    // plain modulo with a power-of-two bound would cycle through every value
    // before repeating instead of sampling independently.
    uint64_t next_below(uint64_t bound) {
        return uint64_t((static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

private:
    uint64_t state_;
};

}  // namespace tprefsim
