#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "util.hpp"

namespace tprefsim {

enum class EntryFormat { triangel42, triage32 };

EntryFormat parse_entry_format(const std::string& text);

// Way within the reserved partition for a given 10-bit tag.
unsigned subset_index(uint16_t tag_hash, unsigned partition_ways);

struct MarkovConfig {
    EntryFormat format = EntryFormat::triangel42;
    unsigned sets = 2048;
    unsigned max_ways = 8;
    unsigned lut_entries = 1024;
    unsigned lut_ways = 16;
};

struct MarkovHit {
    uint64_t target_line = 0;
    bool confident = false;
};

struct MarkovStats {
    uint64_t reads = 0;
    uint64_t writes = 0;
    uint64_t reindex_accesses = 0;
    uint64_t reindex_dropped = 0;
    uint64_t resize_dropped = 0;
    uint64_t target_out_of_range = 0;

    uint64_t total_accesses() const { return reads + writes + reindex_accesses; }
};

struct MarkovEntryInfo {
    unsigned set = 0;
    unsigned way = 0;
    unsigned slot = 0;
    uint16_t hash = 0;
    uint64_t target_line = 0;
    bool confident = false;
};

// History table packed into the reserved L3 ways. Entries within one cache
// line are kept MRU-first; a set remembers the way count it was arranged
// under and is rearranged lazily on its next access after a resize.
class MarkovTable {
public:
    explicit MarkovTable(const MarkovConfig& cfg);

    unsigned sets() const { return sets_; }
    unsigned set_bits() const { return set_bits_; }
    unsigned ways() const { return ways_; }
    unsigned max_ways() const { return max_ways_; }
    unsigned entries_per_line() const { return entries_per_line_; }
    uint64_t capacity() const { return uint64_t(sets_) * ways_ * entries_per_line_; }

    unsigned set_of(uint64_t line) const { return unsigned(line & (sets_ - 1)); }
    uint16_t tag_of(uint64_t line) const { return uint16_t(fold_bits(line >> set_bits_, 10)); }

    void set_ways(unsigned ways);

    std::optional<MarkovHit> lookup(uint64_t line);
    void train(uint64_t line, uint64_t target_line);

    // State inspection without counters or recency effects. Answers only for
    // sets already arranged under the current way count.
    std::optional<MarkovHit> peek(uint64_t line) const;
    bool set_is_fresh(uint64_t line) const;

    MarkovStats& stats() { return stats_; }
    const MarkovStats& stats() const { return stats_; }

    std::vector<MarkovEntryInfo> snapshot() const;

private:
    struct Entry {
        uint16_t hash = 0;
        uint64_t payload = 0;  // triangel: 31-bit target line; triage: idx<<11 | offset
        bool confident = false;
    };
    struct LutSlot {
        uint64_t frame = 0;
        uint64_t stamp = 0;
        bool valid = false;
    };

    std::vector<Entry>& line_at(unsigned set, unsigned way) { return lines_[size_t(set) * max_ways_ + way]; }
    const std::vector<Entry>& line_at(unsigned set, unsigned way) const {
        return lines_[size_t(set) * max_ways_ + way];
    }
    void ensure_arranged(unsigned set);
    std::optional<uint64_t> decode_target(const Entry& e) const;
    std::optional<uint64_t> encode_target(uint64_t target_line);
    unsigned lut_insert(uint64_t frame);

    EntryFormat format_;
    unsigned sets_, set_bits_, max_ways_, entries_per_line_;
    unsigned ways_ = 0;
    std::vector<std::vector<Entry>> lines_;  // sets_ * max_ways_
    std::vector<uint8_t> set_policy_;        // way count each set is arranged under
    std::vector<LutSlot> lut_;
    unsigned lut_sets_ = 0, lut_ways_ = 0;
    uint64_t lut_tick_ = 0;
    MarkovStats stats_;
};

}  // namespace tprefsim
