#include "cache.hpp"

#include <stdexcept>

namespace tprefsim {

namespace {
constexpr uint8_t kRrpvMax = 3;       // 2-bit RRPV
constexpr uint8_t kRrpvInsert = 2;    // long re-reference prediction on fill
}  // namespace

ReplacementPolicy parse_replacement(const std::string& name) {
    if (name == "lru") return ReplacementPolicy::lru;
    if (name == "srrip") return ReplacementPolicy::srrip;
    if (name == "fifo") return ReplacementPolicy::fifo;
    throw std::invalid_argument("unknown replacement policy: '" + name + "'");
}

CacheModel::CacheModel(const CacheConfig& cfg) : policy_(cfg.replacement) {
    if (cfg.ways == 0) throw std::invalid_argument("cache needs ways > 0");
    uint64_t lines = cfg.size_bytes / kLineBytes;
    if (lines == 0 || lines % cfg.ways != 0)
        throw std::invalid_argument("cache size must be a multiple of ways * 64");
    uint64_t sets = lines / cfg.ways;
    if ((sets & (sets - 1)) != 0) throw std::invalid_argument("cache sets must be a power of two");
    sets_ = static_cast<unsigned>(sets);
    ways_ = cfg.ways;
    lines_.resize(static_cast<size_t>(sets_) * ways_);
}

unsigned CacheModel::set_reserved_ways(unsigned n) {
    if (n >= ways_) throw std::invalid_argument("reserved ways must leave at least one data way");
    unsigned invalidated = 0;
    if (n > reserved_) {
        for (unsigned s = 0; s < sets_; ++s) {
            for (unsigned w = reserved_; w < n; ++w) {
                Line& l = lines_[static_cast<size_t>(s) * ways_ + w];
                if (l.valid) ++invalidated;
                l = Line{};
            }
        }
    }
    // Shrinking just widens the data region; the freed ways are already empty
    // (they belonged to metadata, which has its own storage model).
    reserved_ = n;
    return invalidated;
}

CacheModel::Line* CacheModel::find(uint64_t line) {
    unsigned set = static_cast<unsigned>(line & (sets_ - 1));
    Line* base = &lines_[static_cast<size_t>(set) * ways_];
    for (unsigned w = reserved_; w < ways_; ++w)
        if (base[w].valid && base[w].tag == line) return &base[w];
    return nullptr;
}

void CacheModel::touch(Line& l) {
    switch (policy_) {
        case ReplacementPolicy::lru: l.stamp = ++tick_; break;
        case ReplacementPolicy::srrip: l.rrpv = 0; break;
        case ReplacementPolicy::fifo: break;
    }
}

AccessOutcome CacheModel::access(uint64_t line, bool is_store) {
    Line* l = find(line);
    if (l == nullptr) return {AccessResult::miss, false};
    AccessOutcome out;
    if (l->prefetched) {
        out.result = AccessResult::prefetch_first_hit;
        out.prefetch_counted = l->pf_counted;
        l->prefetched = false;
        l->pf_counted = false;
    } else {
        out.result = AccessResult::hit;
    }
    if (is_store) l->dirty = true;
    touch(*l);
    return out;
}

bool CacheModel::contains(uint64_t line) const {
    return const_cast<CacheModel*>(this)->find(line) != nullptr;
}

unsigned CacheModel::victim_way(unsigned set) {
    Line* base = &lines_[static_cast<size_t>(set) * ways_];
    for (unsigned w = reserved_; w < ways_; ++w)
        if (!base[w].valid) return w;
    switch (policy_) {
        case ReplacementPolicy::lru:
        case ReplacementPolicy::fifo: {
            unsigned victim = reserved_;
            for (unsigned w = reserved_ + 1; w < ways_; ++w)
                if (base[w].stamp < base[victim].stamp) victim = w;
            return victim;
        }
        case ReplacementPolicy::srrip: {
            for (;;) {
                for (unsigned w = reserved_; w < ways_; ++w)
                    if (base[w].rrpv == kRrpvMax) return w;
                for (unsigned w = reserved_; w < ways_; ++w)
                    if (base[w].rrpv < kRrpvMax) ++base[w].rrpv;
            }
        }
    }
    return reserved_;
}

std::optional<Evicted> CacheModel::fill(uint64_t line, bool prefetched, bool dirty, bool counted) {
    if (Line* l = find(line)) {
        // Refill of a resident line: merge flags, no eviction.
        l->dirty = l->dirty || dirty;
        touch(*l);
        return std::nullopt;
    }
    unsigned set = static_cast<unsigned>(line & (sets_ - 1));
    unsigned w = victim_way(set);
    Line& l = lines_[static_cast<size_t>(set) * ways_ + w];
    std::optional<Evicted> out;
    if (l.valid) out = Evicted{l.tag, l.dirty, l.prefetched};
    l.valid = true;
    l.tag = line;
    l.dirty = dirty;
    l.prefetched = prefetched;
    l.pf_counted = prefetched && counted;
    l.stamp = ++tick_;
    l.rrpv = kRrpvInsert;
    return out;
}

}  // namespace tprefsim
