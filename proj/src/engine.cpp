#include "engine.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace tprefsim {

EngineKind parse_engine_kind(const std::string& name) {
    if (name == "none") return EngineKind::none;
    if (name == "triage_deg1") return EngineKind::triage_deg1;
    if (name == "triage_deg4") return EngineKind::triage_deg4;
    if (name == "triage_deg4_look2") return EngineKind::triage_deg4_look2;
    if (name == "triangel") return EngineKind::triangel;
    if (name == "triangel_bloom") return EngineKind::triangel_bloom;
    throw std::invalid_argument("unknown engine kind: " + name);
}

const char* engine_kind_name(EngineKind kind) {
    switch (kind) {
        case EngineKind::none: return "none";
        case EngineKind::triage_deg1: return "triage_deg1";
        case EngineKind::triage_deg4: return "triage_deg4";
        case EngineKind::triage_deg4_look2: return "triage_deg4_look2";
        case EngineKind::triangel: return "triangel";
        case EngineKind::triangel_bloom: return "triangel_bloom";
    }
    return "?";
}

bool engine_is_triage(EngineKind kind) {
    return kind == EngineKind::triage_deg1 || kind == EngineKind::triage_deg4 ||
           kind == EngineKind::triage_deg4_look2;
}

bool engine_is_triangel(EngineKind kind) {
    return kind == EngineKind::triangel || kind == EngineKind::triangel_bloom;
}

MetadataReuseBuffer::MetadataReuseBuffer(unsigned entries, unsigned ways,
                                         unsigned markov_sets)
    : ways_(ways) {
    if (entries == 0 || ways == 0 || entries % ways != 0)
        throw std::invalid_argument("reuse buffer entries must divide into ways");
    sets_ = entries / ways;
    if (!std::has_single_bit(sets_) || !std::has_single_bit(markov_sets))
        throw std::invalid_argument("reuse buffer and markov sets must be powers of two");
    slots_.resize(entries);
    markov_set_mask_ = markov_sets - 1;
    set_mask_ = sets_ - 1;
}

unsigned MetadataReuseBuffer::set_of(uint64_t line) const {
    return unsigned(line & markov_set_mask_ & set_mask_);
}

uint32_t MetadataReuseBuffer::key_of(uint64_t line, uint16_t tag_hash) const {
    const uint64_t upper_set = (line & markov_set_mask_) >> std::countr_one(set_mask_);
    return uint32_t((upper_set << 10) | tag_hash);
}

std::optional<MetadataReuseBuffer::Cached> MetadataReuseBuffer::find(
    uint64_t line, uint16_t tag_hash) const {
    const unsigned set = set_of(line);
    const uint32_t key = key_of(line, tag_hash);
    for (unsigned w = 0; w < ways_; ++w) {
        const Slot& s = slots_[size_t(set) * ways_ + w];
        if (s.valid && s.key == key) return Cached{s.target, s.confident};
    }
    return std::nullopt;
}

void MetadataReuseBuffer::fill(uint64_t line, uint16_t tag_hash, uint64_t target,
                               bool confident) {
    const unsigned set = set_of(line);
    const uint32_t key = key_of(line, tag_hash);
    Slot* victim = nullptr;
    for (unsigned w = 0; w < ways_; ++w) {
        Slot& s = slots_[size_t(set) * ways_ + w];
        if (s.valid && s.key == key) {
            s.target = target;
            s.confident = confident;
            return;
        }
        if (!victim || !s.valid || (victim->valid && s.stamp < victim->stamp))
            victim = &s;
    }
    victim->valid = true;
    victim->key = key;
    victim->target = target;
    victim->confident = confident;
    victim->stamp = ++tick_;
}

void MetadataReuseBuffer::clear() {
    for (auto& s : slots_) s.valid = false;
}

PrefetchEngine::PrefetchEngine(const EngineConfig& cfg, CacheModel& l2,
                               CacheModel& l3, MarkovTable& markov,
                               SetDueller* dueller, BloomSizer* bloom,
                               SimCounters& counters, const bool& counting)
    : cfg_(cfg),
      l2_(l2),
      l3_(l3),
      markov_(markov),
      dueller_(dueller),
      bloom_(bloom),
      c_(counters),
      counting_(counting),
      training_(cfg.training, [&l2](uint64_t line) { return l2.contains(line); }),
      mrb_(256, 2, markov.sets()) {}

void PrefetchEngine::count(uint64_t& counter, uint64_t delta) {
    if (counting_) counter += delta;
}

bool PrefetchEngine::use_mrb() const {
    return cfg_.mrb_enabled && engine_is_triangel(cfg_.kind);
}

std::optional<MarkovHit> PrefetchEngine::chain_lookup(uint64_t key) {
    const uint16_t hash = markov_.tag_of(key);
    if (use_mrb()) {
        if (auto cached = mrb_.find(key, hash)) {
            count(c_.mrb_hits);
            return MarkovHit{cached->target, cached->confident};
        }
    }
    const MarkovStats before = markov_.stats();
    auto hit = markov_.lookup(key);
    const MarkovStats& after = markov_.stats();
    count(c_.l3_markov_reads, after.reads - before.reads);
    count(c_.l3_markov_accesses, after.total_accesses() - before.total_accesses());
    if (hit && use_mrb()) mrb_.fill(key, hash, hit->target_line, hit->confident);
    return hit;
}

void PrefetchEngine::train_markov(uint64_t index, uint64_t target) {
    const uint16_t hash = markov_.tag_of(index);
    if (use_mrb()) {
        if (auto cached = mrb_.find(index, hash);
            cached && cached->target == target && cached->confident &&
            markov_.set_is_fresh(index)) {
            // The L3 copy must confirm the buffered state, else the write
            // would not be a no-op and must go through.
            if (auto live = markov_.peek(index);
                live && live->target_line == target && live->confident) {
                count(c_.markov_trains_suppressed);
                return;
            }
        }
    }
    const MarkovStats before = markov_.stats();
    markov_.train(index, target);
    const MarkovStats& after = markov_.stats();
    count(c_.l3_markov_accesses, after.total_accesses() - before.total_accesses());
    count(c_.target_out_of_range, after.target_out_of_range - before.target_out_of_range);
    if (use_mrb()) {
        if (auto live = markov_.peek(index))
            mrb_.fill(index, hash, live->target_line, live->confident);
    }
}

void PrefetchEngine::issue_prefetch(uint64_t target, unsigned depth,
                                    std::vector<uint64_t>& seen, EventResult& out) {
    const bool in_flight = std::find(seen.begin(), seen.end(), target) != seen.end();
    if (in_flight || l2_.contains(target)) {
        count(c_.prefetch_duplicates);
        out.prefetches.push_back({target, depth, PrefetchOutcome::dropped_duplicate});
        return;
    }
    seen.push_back(target);
    PrefetchOutcome outcome;
    if (l3_.contains(target)) {
        outcome = PrefetchOutcome::filled_from_l3;
        count(c_.l3_data_accesses);
    } else {
        outcome = PrefetchOutcome::filled_from_memory;
        count(c_.dram_reads);
        if (cfg_.prefetch_fill_l3) {
            if (auto ev = l3_.fill(target, true, false, false); ev && ev->dirty)
                count(c_.writebacks);
        }
    }
    if (auto ev = l2_.fill(target, true, false, counting_); ev && ev->dirty) {
        count(c_.writebacks);
        if (auto ev3 = l3_.fill(ev->line, false, true, false); ev3 && ev3->dirty)
            count(c_.writebacks);
    }
    count(c_.prefetches_issued);
    out.prefetches.push_back({target, depth, outcome});
}

void PrefetchEngine::run_chain(uint64_t line, unsigned degree, EventResult& out) {
    degree = std::min(degree, cfg_.max_degree);
    std::vector<uint64_t> seen;
    uint64_t key = line;
    for (unsigned depth = 1; depth <= degree; ++depth) {
        auto hit = chain_lookup(key);
        if (!hit) break;
        issue_prefetch(hit->target_line, depth, seen, out);
        key = hit->target_line;
    }
}

EventResult PrefetchEngine::on_l2_event(uint64_t pc, uint64_t line) {
    EventResult out;
    count(c_.train_events);
    if (cfg_.kind == EngineKind::none) return out;
    if (dueller_) dueller_->record_cache(line);

    if (engine_is_triage(cfg_.kind)) {
        auto shift = training_.shift_only(pc, line);
        auto key = cfg_.kind == EngineKind::triage_deg4_look2 ? shift.last1
                                                              : shift.last0;
        if (key) {
            // Sizers see every would-be store so the partition can grow
            // back after shrinking to zero.
            if (dueller_) dueller_->record_markov(*key);
            if (bloom_) bloom_->observe(*key);
            if (markov_.ways() > 0) {
                out.stored = true;
                out.store_index = *key;
                train_markov(*key, line);
            }
        }
        const unsigned degree = cfg_.kind == EngineKind::triage_deg1 ? 1 : 4;
        if (markov_.ways() > 0) run_chain(line, degree, out);
        return out;
    }

    auto decision = training_.train_event(pc, line);
    if (decision.should_store && decision.markov_index) {
        if (dueller_) dueller_->record_markov(*decision.markov_index);
        if (bloom_) bloom_->observe(*decision.markov_index);
        if (markov_.ways() > 0) {
            out.stored = true;
            out.store_index = *decision.markov_index;
            train_markov(*decision.markov_index, line);
        }
    }
    if (decision.should_prefetch && markov_.ways() > 0)
        run_chain(line, decision.degree, out);
    return out;
}

}  // namespace tprefsim
