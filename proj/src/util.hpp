#pragma once

#include <cstdint>

namespace tprefsim {

constexpr unsigned kLineBits = 6;
constexpr uint64_t kLineBytes = 1ULL << kLineBits;

inline constexpr uint64_t line_of(uint64_t addr) { return addr >> kLineBits; }
inline constexpr uint64_t addr_of(uint64_t line) { return line << kLineBits; }

// XOR-fold v into `bits`-wide chunks. All tag fields (Markov, sampler,
// dueller) hash through this so aliasing behaves the same everywhere.
inline constexpr uint64_t fold_bits(uint64_t v, unsigned bits) {
    const uint64_t mask = (1ULL << bits) - 1;
    uint64_t h = 0;
    while (v != 0) {
        h ^= v & mask;
        v >>= bits;
    }
    return h;
}

// splitmix64 finalizer. Stateless mixer for Bloom hashing and seed derivation;
// never used as a random stream.
inline constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a over explicit words; used for the trace identity hash embedded in
// reports so --compare can reject mismatched baselines.
class Fnv1a64 {
public:
    void update(uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (v >> (8 * i)) & 0xff;
            h_ *= 1099511628211ULL;
        }
    }
    uint64_t value() const { return h_; }

private:
    uint64_t h_ = 14695981039346656037ULL;
};

}  // namespace tprefsim
