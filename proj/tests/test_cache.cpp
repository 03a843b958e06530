#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cache.hpp"
#include "doctest.h"
#include "rng.hpp"

using namespace tprefsim;

namespace {

// Independent reference: per-set LRU stacks with explicit fill/eviction,
// ignoring reserved ways by construction (depth = data ways).
class LruStackOracle {
public:
    LruStackOracle(unsigned sets, unsigned depth) : sets_(sets), depth_(depth), stacks_(sets) {}

    bool access(uint64_t line) {
        auto& s = stacks_[line % sets_];
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == line) {
                s.erase(s.begin() + static_cast<long>(i));
                s.push_front(line);
                return true;
            }
        }
        return false;
    }

    // Returns evicted line if any.
    std::optional<uint64_t> fill(uint64_t line) {
        auto& s = stacks_[line % sets_];
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == line) {
                s.erase(s.begin() + static_cast<long>(i));
                s.push_front(line);
                return std::nullopt;
            }
        }
        s.push_front(line);
        if (s.size() > depth_) {
            uint64_t victim = s.back();
            s.pop_back();
            return victim;
        }
        return std::nullopt;
    }

private:
    unsigned sets_, depth_;
    std::vector<std::deque<uint64_t>> stacks_;
};

CacheModel make_cache(unsigned sets, unsigned ways, ReplacementPolicy p) {
    return CacheModel({static_cast<uint64_t>(sets) * ways * kLineBytes, ways, p});
}

}  // namespace

TEST_CASE("miss does not fill; fill then hit") {
    auto c = make_cache(16, 4, ReplacementPolicy::lru);
    CHECK(c.access(5, false).result == AccessResult::miss);
    CHECK(c.access(5, false).result == AccessResult::miss);
    CHECK(!c.fill(5, false, false, false).has_value());
    CHECK(c.access(5, false).result == AccessResult::hit);
    CHECK(c.contains(5));
    CHECK(!c.contains(6));
}

TEST_CASE("prefetched line reports prefetch_first_hit exactly once") {
    auto c = make_cache(16, 4, ReplacementPolicy::lru);
    c.fill(9, true, false, true);
    auto first = c.access(9, false);
    CHECK(first.result == AccessResult::prefetch_first_hit);
    CHECK(first.prefetch_counted);
    CHECK(c.access(9, false).result == AccessResult::hit);

    // Uncounted prefetch (issued during warmup) is flagged as such.
    c.fill(25, true, false, false);
    auto warm = c.access(25, false);
    CHECK(warm.result == AccessResult::prefetch_first_hit);
    CHECK(!warm.prefetch_counted);
}

TEST_CASE("eviction of an unused prefetched line reports the flag") {
    auto c = make_cache(1, 2, ReplacementPolicy::lru);
    c.fill(0, true, false, true);
    c.fill(1, false, false, false);
    auto ev = c.fill(2, false, false, false);
    REQUIRE(ev.has_value());
    CHECK(ev->line == 0);
    CHECK(ev->prefetched);
}

TEST_CASE("stores mark lines dirty and eviction reports a writeback") {
    auto c = make_cache(1, 1, ReplacementPolicy::lru);
    c.fill(3, false, false, false);
    c.access(3, true);
    auto ev = c.fill(4, false, false, false);
    REQUIRE(ev.has_value());
    CHECK(ev->line == 3);
    CHECK(ev->dirty);
    auto ev2 = c.fill(5, false, false, false);
    REQUIRE(ev2.has_value());
    CHECK(!ev2->dirty);
}

TEST_CASE("16-way set with 4 reserved ways holds 12 lines; the 13th evicts LRU") {
    auto c = make_cache(4, 16, ReplacementPolicy::lru);
    CHECK(c.set_reserved_ways(4) == 0);
    CHECK(c.data_ways() == 12);
    // 13 lines mapping to set 0: line = i * 4.
    for (uint64_t i = 0; i < 12; ++i) CHECK(!c.fill(i * 4, false, false, false).has_value());
    for (uint64_t i = 0; i < 12; ++i) CHECK(c.contains(i * 4));
    auto ev = c.fill(12 * 4, false, false, false);
    REQUIRE(ev.has_value());
    CHECK(ev->line == 0);  // first-filled is LRU
    CHECK(!c.contains(0));
    CHECK(c.contains(12 * 4));
}

TEST_CASE("growing the reservation invalidates data in the reserved ways") {
    auto c = make_cache(4, 8, ReplacementPolicy::lru);
    for (uint64_t i = 0; i < 8; ++i) c.fill(i * 4 + 1, false, false, false);  // fill set 1
    CHECK(c.set_reserved_ways(4) == 4);
    unsigned still = 0;
    for (uint64_t i = 0; i < 8; ++i) still += c.contains(i * 4 + 1) ? 1 : 0;
    CHECK(still == 4);
    // Shrinking destroys nothing.
    CHECK(c.set_reserved_ways(2) == 0);
    still = 0;
    for (uint64_t i = 0; i < 8; ++i) still += c.contains(i * 4 + 1) ? 1 : 0;
    CHECK(still == 4);
    CHECK_THROWS_AS(c.set_reserved_ways(8), std::invalid_argument);
}

TEST_CASE("lru matches the stack oracle over random traffic, with partitioning") {
    for (unsigned reserved : {0u, 3u}) {
        auto c = make_cache(8, 8, ReplacementPolicy::lru);
        c.set_reserved_ways(reserved);
        LruStackOracle oracle(8, 8 - reserved);
        Lcg64 rng(123 + reserved);
        for (int i = 0; i < 20000; ++i) {
            uint64_t line = rng.next_below(120);
            bool hit = oracle.access(line);
            auto got = c.access(line, false);
            CHECK((got.result != AccessResult::miss) == hit);
            if (!hit) {
                auto ev_model = c.fill(line, false, false, false);
                auto ev_oracle = oracle.fill(line);
                CHECK(ev_model.has_value() == ev_oracle.has_value());
                if (ev_model && ev_oracle) CHECK(ev_model->line == *ev_oracle);
            }
        }
    }
}

TEST_CASE("stack property: reuse within data-way depth always hits under lru") {
    auto c = make_cache(4, 8, ReplacementPolicy::lru);
    c.set_reserved_ways(2);
    std::map<uint64_t, int> last_use;
    std::map<uint64_t, std::vector<uint64_t>> per_set;  // distinct lines since last use
    Lcg64 rng(7);
    for (int i = 0; i < 5000; ++i) {
        uint64_t line = rng.next_below(64);
        if (c.access(line, false).result == AccessResult::miss) c.fill(line, false, false, false);
    }
    // Deterministic re-check: touch 6 distinct lines of one set, then re-touch
    // the first; with 6 data ways it must still be resident.
    for (uint64_t i = 0; i < 6; ++i) {
        c.access(i * 4, false);
        c.fill(i * 4, false, false, false);
    }
    CHECK(c.access(0, false).result != AccessResult::miss);
    (void)last_use;
    (void)per_set;
}

TEST_CASE("srrip prefers evicting never-referenced lines over re-referenced ones") {
    auto c = make_cache(1, 2, ReplacementPolicy::srrip);
    c.fill(0, false, false, false);
    c.access(0, false);  // promote to rrpv 0
    c.fill(1, false, false, false);
    auto ev = c.fill(2, false, false, false);
    REQUIRE(ev.has_value());
    CHECK(ev->line == 1);  // inserted-never-referenced ages out first
    CHECK(c.contains(0));
}

TEST_CASE("fifo evicts in fill order regardless of hits") {
    auto c = make_cache(1, 2, ReplacementPolicy::fifo);
    c.fill(0, false, false, false);
    c.fill(1, false, false, false);
    c.access(0, false);
    c.access(0, false);
    auto ev = c.fill(2, false, false, false);
    REQUIRE(ev.has_value());
    CHECK(ev->line == 0);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(make_cache(3, 4, ReplacementPolicy::lru), std::invalid_argument);  // sets not pow2
    CHECK_THROWS_AS(CacheModel({0, 4, ReplacementPolicy::lru}), std::invalid_argument);
    CHECK_THROWS_AS(CacheModel({1024, 0, ReplacementPolicy::lru}), std::invalid_argument);
    CHECK(parse_replacement("srrip") == ReplacementPolicy::srrip);
    CHECK_THROWS_AS(parse_replacement("plru"), std::invalid_argument);
}
