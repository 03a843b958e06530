#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rng.hpp"
#include "util.hpp"

namespace tprefsim {

enum class SizerKind { dueller, bloom, fixed };

SizerKind parse_sizer_kind(const std::string& text);

struct DuellerConfig {
    unsigned cache_sets = 2048;
    unsigned sampled_sets = 64;
    unsigned cache_depth = 16;
    unsigned markov_depth = 8;
    unsigned max_ways = 8;
    unsigned markov_weight_divisor = 2;  // each markov hit is worth 12/divisor
    unsigned subsample = 12;
    uint64_t window = 500000;
    uint64_t seed = 1;
};

// Samples 64 cache sets and replays their traffic against per-partition LRU
// stacks to score every possible way split in one pass.
class SetDueller {
public:
    explicit SetDueller(const DuellerConfig& cfg);

    void record_cache(uint64_t line);   // one call per training event
    void record_markov(uint64_t line);  // internally subsampled

    bool window_complete() const { return window_events_ >= cfg_.window; }
    unsigned decide_and_reset();

    const std::vector<uint64_t>& counters() const { return counters_; }
    bool is_sampled(uint64_t line) const;
    std::vector<unsigned> sampled_sets() const;
    uint64_t window_events() const { return window_events_; }

private:
    struct Stacks {
        std::vector<uint16_t> cache;   // MRU first
        std::vector<uint16_t> markov;  // MRU first
    };
    int stack_ref(std::vector<uint16_t>& stack, uint16_t tag, unsigned depth);

    DuellerConfig cfg_;
    unsigned set_bits_;
    std::vector<int> sample_slot_;  // cache set -> stack index or -1
    std::vector<Stacks> stacks_;
    std::vector<uint64_t> counters_;  // max_ways + 1 entries
    uint64_t window_events_ = 0;
};

struct BloomConfig {
    uint64_t expected_inserts = 32768;
    double fp_rate = 0.01;
    double bias = 1.0;
    uint64_t entries_per_way = 24576;
    unsigned max_ways = 8;
    uint64_t window_records = 30000000;
    uint64_t seed = 1;
};

// Counts approximately-unique trained addresses per window and converts the
// count into a partition size.
class BloomSizer {
public:
    explicit BloomSizer(const BloomConfig& cfg);

    void observe(uint64_t line);
    // Advances the per-record window clock; at expiry returns the closing
    // window's target so the caller can shrink, and starts a fresh window.
    std::optional<unsigned> tick_record();

    unsigned target_ways() const;
    uint64_t unique_count() const { return unique_; }
    uint64_t bit_count() const { return bits_.size() * 64; }
    unsigned hash_count() const { return hashes_; }

private:
    bool test_and_set(uint64_t line);

    BloomConfig cfg_;
    std::vector<uint64_t> bits_;
    unsigned hashes_;
    uint64_t mask_;
    uint64_t seed1_, seed2_;
    uint64_t unique_ = 0;
    uint64_t records_ = 0;
};

}  // namespace tprefsim
