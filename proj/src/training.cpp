#include "training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tprefsim {

namespace {

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

double sample_probability(uint64_t sampler_entries, uint64_t max_size, int sample_rate) {
    if (max_size == 0) return 0.0;
    double p = (double(sampler_entries) / double(max_size)) * std::exp2(sample_rate - 8);
    return std::min(1.0, p);
}

TrainingUnit::TrainingUnit(const TrainingConfig& cfg, InL2Fn in_l2)
    : cfg_(cfg), in_l2_(std::move(in_l2)), rng_(cfg.seed ^ 0x7a41a9) {
    if (cfg_.training_entries == 0) throw std::invalid_argument("training table needs entries");
    if (cfg_.sampler_ways == 0 || cfg_.sampler_entries % cfg_.sampler_ways != 0)
        throw std::invalid_argument("sampler geometry invalid");
    sampler_sets_ = cfg_.sampler_entries / cfg_.sampler_ways;
    if (!is_pow2(sampler_sets_)) throw std::invalid_argument("sampler sets must be a power of two");
    sampler_set_bits_ = 0;
    while ((1u << sampler_set_bits_) < sampler_sets_) ++sampler_set_bits_;
    table_.resize(cfg_.training_entries);
    sampler_.resize(cfg_.sampler_entries);
    neutral_probability_ = cfg_.max_size ? double(cfg_.sampler_entries) / double(cfg_.max_size) : 0.0;
}

unsigned TrainingUnit::locate(uint64_t pc) {
    uint16_t tag = uint16_t(fold_bits(pc, 10));
    unsigned victim = 0;
    uint64_t oldest = UINT64_MAX;
    for (unsigned i = 0; i < table_.size(); ++i) {
        Entry& e = table_[i];
        if (e.valid && e.tag == tag) {
            e.stamp = ++tick_;
            return i;
        }
        if (!e.valid) {
            if (oldest != 0) {
                victim = i;
                oldest = 0;
            }
        } else if (e.stamp < oldest) {
            victim = i;
            oldest = e.stamp;
        }
    }
    Entry& e = table_[victim];
    e = Entry{};
    e.valid = true;
    e.pc = pc;
    e.tag = tag;
    e.rate = cfg_.initial_sample_rate;
    e.stamp = ++tick_;
    return victim;
}

TrainingUnit::SamplerEntry* TrainingUnit::sampler_find(uint64_t key_line, uint16_t idx) {
    unsigned set = unsigned(key_line & (sampler_sets_ - 1));
    uint32_t tag = uint32_t(fold_bits(key_line >> sampler_set_bits_, 22));
    for (unsigned w = 0; w < cfg_.sampler_ways; ++w) {
        SamplerEntry& s = sampler_[size_t(set) * cfg_.sampler_ways + w];
        if (s.valid && s.tag == tag && s.idx == idx) return &s;
    }
    return nullptr;
}

void TrainingUnit::sampler_check(unsigned slot, uint64_t current_line) {
    Entry& e = table_[slot];
    ++stats_.sampler_checks;
    SamplerEntry* s = sampler_find(e.last[0], uint16_t(slot));
    if (!s) return;
    ++stats_.sampler_hits;
    int64_t d = int64_t(e.ts) - int64_t(s->ts);
    bump(e.reuse, d <= int64_t(cfg_.max_size) ? 1 : -1);
    if (s->target == current_line) {
        bump(e.base, cfg_.base_up);
        bump(e.high, cfg_.high_up);
    } else if (in_l2_ && in_l2_(s->target)) {
        // A prefetch to the sampled target would have hit anyway; no verdict.
    } else if (cfg_.use_scs) {
        scs_insert(slot, s->target);
    } else {
        bump(e.base, -cfg_.base_down);
        bump(e.high, -cfg_.high_down);
    }
    s->used = true;
    s->target = current_line;
    s->ts = e.ts;
    s->stamp = ++sampler_tick_;
}

void TrainingUnit::sampler_insert(unsigned slot, uint64_t key_line, uint64_t target_line) {
    Entry& inserter = table_[slot];
    ++stats_.sampler_inserts;
    if (SamplerEntry* dup = sampler_find(key_line, uint16_t(slot))) {
        dup->target = target_line;
        dup->ts = inserter.ts;
        dup->stamp = ++sampler_tick_;
        return;
    }
    unsigned set = unsigned(key_line & (sampler_sets_ - 1));
    uint32_t tag = uint32_t(fold_bits(key_line >> sampler_set_bits_, 22));
    SamplerEntry* victim = nullptr;
    for (unsigned w = 0; w < cfg_.sampler_ways; ++w) {
        SamplerEntry& s = sampler_[size_t(set) * cfg_.sampler_ways + w];
        if (!s.valid) {
            victim = &s;
            break;
        }
        if (!victim || s.stamp < victim->stamp) victim = &s;
    }
    if (victim->valid) {
        int64_t age = int64_t(table_[victim->idx].ts) - int64_t(victim->ts);
        if (age > int64_t(cfg_.max_size)) {
            if (!victim->used) {
                bump(table_[victim->idx].reuse, -1);
                bump(inserter.rate, 1);
                ++stats_.sampler_victim_stale;
            }
        } else if (age > 0 && !victim->used) {
            bump(inserter.rate, -1);
            ++stats_.sampler_victim_live;
        }
    }
    *victim = SamplerEntry{true, tag, uint16_t(slot), target_line, inserter.ts, false, ++sampler_tick_};
}

void TrainingUnit::scs_penalize(uint16_t idx) {
    Entry& owner = table_[idx];
    bump(owner.base, -cfg_.base_down);
    bump(owner.high, -cfg_.high_down);
}

void TrainingUnit::scs_sweep() {
    while (!scs_.empty() && scs_.front().deadline < stats_.events) {
        scs_penalize(scs_.front().idx);
        scs_.pop_front();
        ++stats_.scs_expiries;
    }
}

void TrainingUnit::scs_insert(unsigned slot, uint64_t target_line) {
    if (scs_.size() == cfg_.scs_entries) {
        scs_penalize(scs_.front().idx);
        scs_.pop_front();
        ++stats_.scs_evictions;
    }
    scs_.push_back({target_line, uint16_t(slot), stats_.events + cfg_.scs_window});
    ++stats_.scs_inserts;
}

void TrainingUnit::scs_check(unsigned slot, uint64_t current_line) {
    for (size_t i = 0; i < scs_.size(); ++i) {
        if (scs_[i].target != current_line || scs_[i].idx != slot) continue;
        Entry& e = table_[slot];
        bump(e.base, cfg_.base_up);
        bump(e.high, cfg_.high_up);
        scs_.erase(scs_.begin() + long(i));
        ++stats_.scs_hits;
        return;
    }
}

TrainingDecision TrainingUnit::train_event(uint64_t pc, uint64_t line) {
    ++stats_.events;
    unsigned slot = locate(pc);
    Entry& e = table_[slot];
    ++e.ts;
    scs_sweep();
    if (e.valid_addrs >= 1) sampler_check(slot, line);
    scs_check(slot, line);
    if (e.valid_addrs >= 1) {
        double p = std::min(1.0, neutral_probability_ * std::exp2(e.rate - 8));
        if (rng_.next_unit() < p) sampler_insert(slot, e.last[0], line);
    }

    TrainingDecision d;
    bool reuse_ok = !cfg_.gate_reuse || e.reuse > 8;
    bool base_ok = !cfg_.gate_base || e.base > 8;
    d.should_store = d.should_prefetch = reuse_ok && base_ok;
    d.degree = cfg_.use_high ? (e.high > 8 ? 4u : 1u) : 4u;
    unsigned distance = !cfg_.use_lookahead ? 1u : (!cfg_.use_high ? 2u : (e.look2 ? 2u : 1u));
    if (d.should_store) {
        if (distance == 2 && e.valid_addrs >= 2)
            d.markov_index = e.last[1];
        else if (distance == 1 && e.valid_addrs >= 1)
            d.markov_index = e.last[0];
    }

    if (e.high == 15) e.look2 = true;
    if (e.base < 8) e.look2 = false;

    e.last[1] = e.last[0];
    e.last[0] = line;
    e.valid_addrs = std::min(2u, e.valid_addrs + 1);
    return d;
}

TrainingUnit::ShiftResult TrainingUnit::shift_only(uint64_t pc, uint64_t line) {
    unsigned slot = locate(pc);
    Entry& e = table_[slot];
    ShiftResult r;
    if (e.valid_addrs >= 1) r.last0 = e.last[0];
    if (e.valid_addrs >= 2) r.last1 = e.last[1];
    e.last[1] = e.last[0];
    e.last[0] = line;
    e.valid_addrs = std::min(2u, e.valid_addrs + 1);
    return r;
}

std::optional<TrainingEntryView> TrainingUnit::inspect(uint64_t pc) const {
    uint16_t tag = uint16_t(fold_bits(pc, 10));
    for (unsigned i = 0; i < table_.size(); ++i) {
        const Entry& e = table_[i];
        if (!e.valid || e.tag != tag) continue;
        TrainingEntryView v;
        v.pc = e.pc;
        v.pc_tag = e.tag;
        if (e.valid_addrs >= 1) v.last0 = e.last[0];
        if (e.valid_addrs >= 2) v.last1 = e.last[1];
        v.timestamp = e.ts;
        v.reuse = e.reuse;
        v.base = e.base;
        v.high = e.high;
        v.rate = e.rate;
        v.lookahead2 = e.look2;
        v.slot = i;
        return v;
    }
    return std::nullopt;
}

}  // namespace tprefsim
