#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cache.hpp"
#include "markov.hpp"
#include "metrics.hpp"
#include "sizing.hpp"
#include "training.hpp"

namespace tprefsim {

enum class EngineKind {
    none,
    triage_deg1,
    triage_deg4,
    triage_deg4_look2,
    triangel,
    triangel_bloom,
};

EngineKind parse_engine_kind(const std::string& name);
const char* engine_kind_name(EngineKind kind);
bool engine_is_triage(EngineKind kind);
bool engine_is_triangel(EngineKind kind);

enum class PrefetchOutcome { filled_from_l3, filled_from_memory, dropped_duplicate };

struct PrefetchIssue {
    uint64_t target = 0;
    unsigned depth = 0;
    PrefetchOutcome outcome = PrefetchOutcome::dropped_duplicate;
};

struct EventResult {
    bool stored = false;
    std::optional<uint64_t> store_index;
    std::vector<PrefetchIssue> prefetches;
};

// Small cache in front of the markov partition. Keyed by the lookup line's
// hash plus the markov-set bits the buffer index drops; caches the decoded
// entry so repeat walk steps and confirmed-identical updates skip the L3.
class MetadataReuseBuffer {
public:
    struct Cached {
        uint64_t target = 0;
        bool confident = false;
    };

    MetadataReuseBuffer(unsigned entries = 256, unsigned ways = 2,
                        unsigned markov_sets = 2048);

    std::optional<Cached> find(uint64_t line, uint16_t tag_hash) const;
    // Inserts FIFO; an existing entry is refreshed in place without
    // disturbing its queue position.
    void fill(uint64_t line, uint16_t tag_hash, uint64_t target, bool confident);
    void clear();

    unsigned sets() const { return sets_; }
    unsigned ways() const { return ways_; }

private:
    struct Slot {
        uint32_t key = 0;  // markov set bits above the buffer index, then hash
        uint64_t target = 0;
        uint64_t stamp = 0;
        bool confident = false;
        bool valid = false;
    };

    unsigned set_of(uint64_t line) const;
    uint32_t key_of(uint64_t line, uint16_t tag_hash) const;

    std::vector<Slot> slots_;
    unsigned sets_ = 0, ways_ = 0;
    uint64_t markov_set_mask_ = 0, set_mask_ = 0;
    uint64_t tick_ = 0;
};

struct EngineConfig {
    EngineKind kind = EngineKind::triangel;
    unsigned max_degree = 4;
    bool mrb_enabled = true;
    bool prefetch_fill_l3 = true;
    TrainingConfig training;
};

// One core's prefetch engine. Owns the training unit and MRB; the markov
// table, sizer, and caches are shared state owned by the simulation.
class PrefetchEngine {
public:
    PrefetchEngine(const EngineConfig& cfg, CacheModel& l2, CacheModel& l3,
                   MarkovTable& markov, SetDueller* dueller, BloomSizer* bloom,
                   SimCounters& counters, const bool& counting);

    // record is a demand miss or a prefetched line's first hit; plain hits
    // never reach the engine.
    EventResult on_l2_event(uint64_t pc, uint64_t line);

    const TrainingUnit& training() const { return training_; }
    TrainingUnit& training() { return training_; }
    const MetadataReuseBuffer& mrb() const { return mrb_; }
    EngineKind kind() const { return cfg_.kind; }

private:
    bool use_mrb() const;
    std::optional<MarkovHit> chain_lookup(uint64_t key);
    void train_markov(uint64_t index, uint64_t target);
    void run_chain(uint64_t line, unsigned degree, EventResult& out);
    void issue_prefetch(uint64_t target, unsigned depth,
                        std::vector<uint64_t>& seen, EventResult& out);
    void count(uint64_t& counter, uint64_t delta = 1);

    EngineConfig cfg_;
    CacheModel& l2_;
    CacheModel& l3_;
    MarkovTable& markov_;
    SetDueller* dueller_;
    BloomSizer* bloom_;
    SimCounters& c_;
    const bool& counting_;
    TrainingUnit training_;
    MetadataReuseBuffer mrb_;
};

}  // namespace tprefsim
