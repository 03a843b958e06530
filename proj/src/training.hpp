#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "rng.hpp"
#include "util.hpp"

namespace tprefsim {

struct TrainingConfig {
    unsigned training_entries = 512;
    unsigned sampler_entries = 512;
    unsigned sampler_ways = 2;
    unsigned scs_entries = 64;
    unsigned scs_window = 512;
    uint64_t max_size = 196608;
    int base_up = 1;
    int base_down = 2;
    int high_up = 1;
    int high_down = 5;
    int initial_sample_rate = 8;
    uint64_t seed = 1;
    // Aggression-control switches; disabling one removes its influence.
    bool gate_reuse = true;
    bool gate_base = true;
    bool use_high = true;
    bool use_scs = true;
    bool use_lookahead = true;
};

struct TrainingDecision {
    bool should_store = false;
    bool should_prefetch = false;
    unsigned degree = 1;
    std::optional<uint64_t> markov_index;
};

struct TrainingEntryView {
    uint64_t pc = 0;
    uint16_t pc_tag = 0;
    std::optional<uint64_t> last0, last1;
    uint32_t timestamp = 0;
    int reuse = 8, base = 8, high = 8, rate = 8;
    bool lookahead2 = false;
    unsigned slot = 0;
};

struct TrainingStats {
    uint64_t events = 0;
    uint64_t sampler_checks = 0;
    uint64_t sampler_hits = 0;
    uint64_t sampler_inserts = 0;
    uint64_t sampler_victim_stale = 0;
    uint64_t sampler_victim_live = 0;
    uint64_t scs_inserts = 0;
    uint64_t scs_hits = 0;
    uint64_t scs_expiries = 0;
    uint64_t scs_evictions = 0;
};

// Training table, History Sampler, and Second-Chance Sampler. Classifies each
// PC's stream and decides whether to store pairs, prefetch, and at what
// degree and lookahead distance.
class TrainingUnit {
public:
    using InL2Fn = std::function<bool(uint64_t line)>;

    explicit TrainingUnit(const TrainingConfig& cfg, InL2Fn in_l2 = {});

    TrainingDecision train_event(uint64_t pc, uint64_t line);

    struct ShiftResult {
        std::optional<uint64_t> last0, last1;
    };
    // Reduced path: track LastAddr only, no counters or samplers.
    ShiftResult shift_only(uint64_t pc, uint64_t line);

    std::optional<TrainingEntryView> inspect(uint64_t pc) const;
    const TrainingStats& stats() const { return stats_; }
    unsigned scs_occupancy() const { return unsigned(scs_.size()); }

private:
    struct Entry {
        bool valid = false;
        uint64_t pc = 0;
        uint16_t tag = 0;
        uint64_t last[2] = {0, 0};
        unsigned valid_addrs = 0;
        uint32_t ts = 0;
        int reuse = 8, base = 8, high = 8, rate = 8;
        bool look2 = false;
        uint64_t stamp = 0;
    };
    struct SamplerEntry {
        bool valid = false;
        uint32_t tag = 0;
        uint16_t idx = 0;
        uint64_t target = 0;
        uint32_t ts = 0;
        bool used = false;
        uint64_t stamp = 0;
    };
    struct ScsEntry {
        uint64_t target = 0;
        uint16_t idx = 0;
        uint64_t deadline = 0;
    };

    unsigned locate(uint64_t pc);
    void sampler_check(unsigned slot, uint64_t current_line);
    void sampler_insert(unsigned slot, uint64_t key_line, uint64_t target_line);
    void scs_check(unsigned slot, uint64_t current_line);
    void scs_sweep();
    void scs_insert(unsigned slot, uint64_t target_line);
    void scs_penalize(uint16_t idx);
    void bump(int& counter, int delta) { counter = std::min(15, std::max(0, counter + delta)); }
    SamplerEntry* sampler_find(uint64_t key_line, uint16_t idx);

    TrainingConfig cfg_;
    InL2Fn in_l2_;
    std::vector<Entry> table_;
    std::vector<SamplerEntry> sampler_;
    unsigned sampler_sets_, sampler_set_bits_;
    std::deque<ScsEntry> scs_;
    double neutral_probability_;  // capacity ratio before the rate exponent
    uint64_t tick_ = 0;
    uint64_t sampler_tick_ = 0;
    Lcg64 rng_;
    TrainingStats stats_;
};

// Insertion probability for the History Sampler, clamped to 1.
double sample_probability(uint64_t sampler_entries, uint64_t max_size, int sample_rate);

}  // namespace tprefsim
