#include "sizing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tprefsim {

namespace {

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

uint64_t next_pow2(uint64_t v) {
    uint64_t r = 1;
    while (r < v) r <<= 1;
    return r;
}

}  // namespace

SizerKind parse_sizer_kind(const std::string& text) {
    if (text == "dueller") return SizerKind::dueller;
    if (text == "bloom") return SizerKind::bloom;
    if (text == "fixed") return SizerKind::fixed;
    throw std::invalid_argument("unknown sizer kind: " + text);
}

SetDueller::SetDueller(const DuellerConfig& cfg) : cfg_(cfg) {
    if (!is_pow2(cfg_.cache_sets)) throw std::invalid_argument("dueller cache sets must be a power of two");
    if (cfg_.sampled_sets == 0 || cfg_.sampled_sets > cfg_.cache_sets)
        throw std::invalid_argument("dueller sampled set count out of range");
    if (cfg_.markov_weight_divisor == 0 || cfg_.subsample == 0)
        throw std::invalid_argument("dueller weights must be nonzero");
    set_bits_ = 0;
    while ((1u << set_bits_) < cfg_.cache_sets) ++set_bits_;

    // Sampled sets are drawn once per run and stay fixed.
    std::vector<unsigned> ids(cfg_.cache_sets);
    std::iota(ids.begin(), ids.end(), 0u);
    Lcg64 rng(cfg_.seed ^ 0xd0e11e5);
    for (unsigned i = 0; i < cfg_.sampled_sets; ++i) {
        uint64_t j = i + rng.next_below(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
    sample_slot_.assign(cfg_.cache_sets, -1);
    for (unsigned i = 0; i < cfg_.sampled_sets; ++i) sample_slot_[ids[i]] = int(i);
    stacks_.resize(cfg_.sampled_sets);
    counters_.assign(cfg_.max_ways + 1, 0);
}

int SetDueller::stack_ref(std::vector<uint16_t>& stack, uint16_t tag, unsigned depth) {
    for (size_t i = 0; i < stack.size(); ++i) {
        if (stack[i] != tag) continue;
        stack.erase(stack.begin() + long(i));
        stack.insert(stack.begin(), tag);
        return int(i) + 1;
    }
    stack.insert(stack.begin(), tag);
    if (stack.size() > depth) stack.pop_back();
    return -1;
}

void SetDueller::record_cache(uint64_t line) {
    ++window_events_;
    int slot = sample_slot_[line & (cfg_.cache_sets - 1)];
    if (slot < 0) return;
    uint16_t tag = uint16_t(fold_bits(line >> set_bits_, 10));
    int d = stack_ref(stacks_[slot].cache, tag, cfg_.cache_depth);
    if (d < 0) return;
    for (unsigned p = 0; p <= cfg_.max_ways; ++p)
        if (cfg_.cache_depth - p >= unsigned(d)) counters_[p] += 1;
}

void SetDueller::record_markov(uint64_t line) {
    if ((line >> set_bits_) % cfg_.subsample != 0) return;
    int slot = sample_slot_[line & (cfg_.cache_sets - 1)];
    if (slot < 0) return;
    uint16_t tag = uint16_t(fold_bits(line >> set_bits_, 10));
    int d = stack_ref(stacks_[slot].markov, tag, cfg_.markov_depth);
    if (d < 0) return;
    uint64_t weight = cfg_.subsample / cfg_.markov_weight_divisor;
    for (unsigned p = 0; p <= cfg_.max_ways; ++p)
        if (p >= unsigned(d)) counters_[p] += weight;
}

unsigned SetDueller::decide_and_reset() {
    unsigned best = 0;
    for (unsigned p = 1; p <= cfg_.max_ways; ++p)
        if (counters_[p] > counters_[best]) best = p;
    std::fill(counters_.begin(), counters_.end(), 0);
    window_events_ = 0;
    return best;
}

bool SetDueller::is_sampled(uint64_t line) const {
    return sample_slot_[line & (cfg_.cache_sets - 1)] >= 0;
}

std::vector<unsigned> SetDueller::sampled_sets() const {
    std::vector<unsigned> out;
    for (unsigned s = 0; s < cfg_.cache_sets; ++s)
        if (sample_slot_[s] >= 0) out.push_back(s);
    return out;
}

BloomSizer::BloomSizer(const BloomConfig& cfg) : cfg_(cfg) {
    if (cfg_.fp_rate <= 0.0 || cfg_.fp_rate >= 1.0) throw std::invalid_argument("bloom fp rate must be in (0,1)");
    if (cfg_.expected_inserts == 0 || cfg_.entries_per_way == 0)
        throw std::invalid_argument("bloom sizing parameters must be nonzero");
    double ln2 = std::log(2.0);
    double m = std::ceil(-double(cfg_.expected_inserts) * std::log(cfg_.fp_rate) / (ln2 * ln2));
    uint64_t bits = next_pow2(uint64_t(m));
    bits_.assign(bits / 64, 0);
    mask_ = bits - 1;
    hashes_ = std::max(1u, unsigned(std::lround(ln2 * double(bits) / double(cfg_.expected_inserts))));
    seed1_ = mix64(cfg_.seed ^ 0xb100f11);
    seed2_ = mix64(cfg_.seed ^ 0x5eedb17);
}

bool BloomSizer::test_and_set(uint64_t line) {
    uint64_t h1 = mix64(line ^ seed1_);
    uint64_t h2 = mix64(line ^ seed2_) | 1;
    bool present = true;
    for (unsigned i = 0; i < hashes_; ++i) {
        uint64_t idx = (h1 + i * h2) & mask_;
        uint64_t& word = bits_[idx >> 6];
        uint64_t bit = uint64_t(1) << (idx & 63);
        if (!(word & bit)) {
            present = false;
            word |= bit;
        }
    }
    return present;
}

void BloomSizer::observe(uint64_t line) {
    if (!test_and_set(line)) ++unique_;
}

unsigned BloomSizer::target_ways() const {
    if (unique_ == 0) return 0;
    double needed = std::ceil(double(unique_) * cfg_.bias / double(cfg_.entries_per_way));
    return unsigned(std::min<double>(cfg_.max_ways, needed));
}

std::optional<unsigned> BloomSizer::tick_record() {
    ++records_;
    if (records_ < cfg_.window_records) return std::nullopt;
    unsigned target = target_ways();
    std::fill(bits_.begin(), bits_.end(), 0);
    unique_ = 0;
    records_ = 0;
    return target;
}

}  // namespace tprefsim
