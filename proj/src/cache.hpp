#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "util.hpp"

namespace tprefsim {

enum class ReplacementPolicy { lru, srrip, fifo };

ReplacementPolicy parse_replacement(const std::string& name);

struct CacheConfig {
    uint64_t size_bytes = 0;
    unsigned ways = 0;
    ReplacementPolicy replacement = ReplacementPolicy::lru;
};

enum class AccessResult { hit, prefetch_first_hit, miss };

struct AccessOutcome {
    AccessResult result = AccessResult::miss;
    // Valid on prefetch_first_hit: the fill said its issue was counted, so the
    // consumer may count the use without breaking used <= issued.
    bool prefetch_counted = false;
};

struct Evicted {
    uint64_t line = 0;
    bool dirty = false;
    bool prefetched = false;  // prefetched and never demanded
};

// Set-associative cache with way partitioning. Ways [0, reserved) are carved
// out for Markov metadata and never hold data; replacement only ever touches
// ways [reserved, ways). Untimed: accesses are counted by the caller, not
// delayed. A miss does not fill; fills are explicit.
class CacheModel {
public:
    explicit CacheModel(const CacheConfig& cfg);

    unsigned sets() const { return sets_; }
    unsigned ways() const { return ways_; }
    unsigned data_ways() const { return ways_ - reserved_; }
    unsigned reserved_ways() const { return reserved_; }

    // Returns the number of valid data lines invalidated by the change
    // (growing the reservation destroys data in the newly reserved ways).
    unsigned set_reserved_ways(unsigned n);

    AccessOutcome access(uint64_t line, bool is_store);
    bool contains(uint64_t line) const;

    // prefetched marks a line filled by the prefetcher and not yet demanded;
    // counted tags it as issued inside the measurement window.
    std::optional<Evicted> fill(uint64_t line, bool prefetched, bool dirty, bool counted);

private:
    struct Line {
        uint64_t tag = 0;
        uint64_t stamp = 0;  // lru: access order; fifo: fill order
        uint8_t rrpv = 3;
        bool valid = false;
        bool dirty = false;
        bool prefetched = false;
        bool pf_counted = false;
    };

    Line* find(uint64_t line);
    unsigned victim_way(unsigned set);
    void touch(Line& l);

    std::vector<Line> lines_;  // sets_ x ways_
    unsigned sets_ = 0;
    unsigned ways_ = 0;
    unsigned reserved_ = 0;
    uint64_t tick_ = 0;
    ReplacementPolicy policy_;
};

}  // namespace tprefsim
