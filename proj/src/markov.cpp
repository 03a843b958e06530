#include "markov.hpp"

#include <algorithm>
#include <stdexcept>

namespace tprefsim {

namespace {

constexpr uint64_t kTriangelTargetMask = (uint64_t(1) << 31) - 1;
constexpr uint64_t kTriageOffsetMask = (uint64_t(1) << 11) - 1;

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

EntryFormat parse_entry_format(const std::string& text) {
    if (text == "triangel42") return EntryFormat::triangel42;
    if (text == "triage32") return EntryFormat::triage32;
    throw std::invalid_argument("unknown markov entry format: " + text);
}

unsigned subset_index(uint16_t tag_hash, unsigned partition_ways) {
    return tag_hash % partition_ways;
}

MarkovTable::MarkovTable(const MarkovConfig& cfg)
    : format_(cfg.format),
      sets_(cfg.sets),
      max_ways_(cfg.max_ways),
      entries_per_line_(cfg.format == EntryFormat::triangel42 ? 12 : 16) {
    if (!is_pow2(sets_)) throw std::invalid_argument("markov sets must be a power of two");
    if (max_ways_ == 0 || max_ways_ > 8) throw std::invalid_argument("markov max ways must be 1..8");
    set_bits_ = 0;
    while ((1u << set_bits_) < sets_) ++set_bits_;
    lines_.resize(size_t(sets_) * max_ways_);
    set_policy_.assign(sets_, 0);
    if (format_ == EntryFormat::triage32) {
        lut_ways_ = cfg.lut_ways;
        if (lut_ways_ == 0 || cfg.lut_entries == 0 || cfg.lut_entries % lut_ways_ != 0)
            throw std::invalid_argument("lookup table geometry invalid");
        lut_sets_ = cfg.lut_entries / lut_ways_;
        if (!is_pow2(lut_sets_)) throw std::invalid_argument("lookup table sets must be a power of two");
        if (cfg.lut_entries > 1024) throw std::invalid_argument("lookup table index exceeds 10 bits");
        lut_.resize(cfg.lut_entries);
    }
}

void MarkovTable::set_ways(unsigned ways) {
    if (ways > max_ways_) throw std::invalid_argument("markov ways above reserved maximum");
    if (ways == ways_) return;
    if (ways < ways_) {
        // Ways handed back to the data cache lose their contents at once.
        for (unsigned s = 0; s < sets_; ++s) {
            for (unsigned w = ways; w < max_ways_; ++w) {
                stats_.resize_dropped += line_at(s, w).size();
                line_at(s, w).clear();
            }
        }
    }
    unsigned old = ways_;
    ways_ = ways;
    if (ways_ == 0 || old == 0) {
        // Nothing resident to move; arrange every set immediately.
        std::fill(set_policy_.begin(), set_policy_.end(), uint8_t(ways_));
    }
}

void MarkovTable::ensure_arranged(unsigned set) {
    if (set_policy_[set] == ways_) return;
    std::vector<Entry> collected;
    for (unsigned w = 0; w < max_ways_; ++w) {
        auto& line = line_at(set, w);
        for (auto& e : line) collected.push_back(e);
        line.clear();
    }
    for (auto& e : collected) {
        auto& line = line_at(set, subset_index(e.hash, ways_));
        if (line.size() < entries_per_line_)
            line.push_back(e);
        else
            ++stats_.reindex_dropped;
    }
    stats_.reindex_accesses += ways_;
    set_policy_[set] = uint8_t(ways_);
}

std::optional<uint64_t> MarkovTable::decode_target(const Entry& e) const {
    if (format_ == EntryFormat::triangel42) return e.payload;
    unsigned idx = unsigned(e.payload >> 11);
    const LutSlot& slot = lut_[idx];
    if (!slot.valid) return std::nullopt;
    return (slot.frame << 11) | (e.payload & kTriageOffsetMask);
}

unsigned MarkovTable::lut_insert(uint64_t frame) {
    unsigned set = unsigned(frame & (lut_sets_ - 1));
    unsigned base = set * lut_ways_;
    unsigned victim = 0;
    uint64_t oldest = UINT64_MAX;
    for (unsigned w = 0; w < lut_ways_; ++w) {
        LutSlot& s = lut_[base + w];
        if (s.valid && s.frame == frame) {
            s.stamp = ++lut_tick_;
            return base + w;
        }
        if (!s.valid) {
            victim = w;
            oldest = 0;
        } else if (s.stamp < oldest) {
            victim = w;
            oldest = s.stamp;
        }
    }
    LutSlot& s = lut_[base + victim];
    s.frame = frame;
    s.stamp = ++lut_tick_;
    s.valid = true;
    return base + victim;
}

std::optional<uint64_t> MarkovTable::encode_target(uint64_t target_line) {
    if (format_ == EntryFormat::triangel42) {
        if (target_line > kTriangelTargetMask) return std::nullopt;
        return target_line;
    }
    unsigned idx = lut_insert(target_line >> 11);
    return (uint64_t(idx) << 11) | (target_line & kTriageOffsetMask);
}

std::optional<MarkovHit> MarkovTable::lookup(uint64_t line) {
    if (ways_ == 0) return std::nullopt;
    unsigned set = set_of(line);
    ensure_arranged(set);
    ++stats_.reads;
    uint16_t tag = tag_of(line);
    auto& slots = line_at(set, subset_index(tag, ways_));
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].hash != tag) continue;
        Entry e = slots[i];
        slots.erase(slots.begin() + long(i));
        slots.insert(slots.begin(), e);
        auto target = decode_target(e);
        if (!target) return std::nullopt;
        return MarkovHit{*target, e.confident};
    }
    return std::nullopt;
}

void MarkovTable::train(uint64_t line, uint64_t target_line) {
    if (ways_ == 0) return;
    auto encoded = encode_target(target_line);
    if (!encoded) {
        ++stats_.target_out_of_range;
        return;
    }
    unsigned set = set_of(line);
    ensure_arranged(set);
    ++stats_.writes;
    uint16_t tag = tag_of(line);
    auto& slots = line_at(set, subset_index(tag, ways_));
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].hash != tag) continue;
        Entry e = slots[i];
        if (e.payload == *encoded) {
            if (e.confident) return;  // unchanged; line not rewritten
            e.confident = true;
        } else if (e.confident) {
            e.confident = false;  // replacement blocked this round
        } else {
            e.payload = *encoded;
        }
        slots.erase(slots.begin() + long(i));
        slots.insert(slots.begin(), e);
        return;
    }
    if (slots.size() == entries_per_line_) slots.pop_back();
    slots.insert(slots.begin(), Entry{tag, *encoded, false});
}

std::optional<MarkovHit> MarkovTable::peek(uint64_t line) const {
    if (ways_ == 0) return std::nullopt;
    unsigned set = set_of(line);
    if (set_policy_[set] != ways_) return std::nullopt;
    uint16_t tag = tag_of(line);
    const auto& slots = line_at(set, subset_index(tag, ways_));
    for (const auto& e : slots) {
        if (e.hash != tag) continue;
        auto target = decode_target(e);
        if (!target) return std::nullopt;
        return MarkovHit{*target, e.confident};
    }
    return std::nullopt;
}

bool MarkovTable::set_is_fresh(uint64_t line) const {
    return ways_ != 0 && set_policy_[set_of(line)] == ways_;
}

std::vector<MarkovEntryInfo> MarkovTable::snapshot() const {
    std::vector<MarkovEntryInfo> out;
    for (unsigned s = 0; s < sets_; ++s) {
        for (unsigned w = 0; w < max_ways_; ++w) {
            const auto& slots = line_at(s, w);
            for (unsigned i = 0; i < slots.size(); ++i) {
                auto target = decode_target(slots[i]);
                out.push_back({s, w, i, slots[i].hash, target.value_or(0), slots[i].confident});
            }
        }
    }
    return out;
}

}  // namespace tprefsim
