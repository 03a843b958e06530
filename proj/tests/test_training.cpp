#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rng.hpp"
#include "training.hpp"

using namespace tprefsim;

namespace {

constexpr uint64_t kPc = 0x400100;

TrainingConfig quick_cfg() {
    TrainingConfig cfg;
    cfg.max_size = 512;  // capacity ratio 1 => every pair is sampled
    return cfg;
}

// Distinct sampler sets so entries never collide.
constexpr uint64_t kX = 0x101, kY = 0x202, kZ = 0x303;

}  // namespace

TEST_CASE("insertion probability formula") {
    CHECK(sample_probability(512, 196608, 8) == doctest::Approx(0.0026042).epsilon(1e-4));
    CHECK(sample_probability(512, 196608, 12) == doctest::Approx(0.0416667).epsilon(1e-4));
    CHECK(sample_probability(512, 512, 8) == 1.0);
    CHECK(sample_probability(512, 0, 8) == 0.0);
}

TEST_CASE("fresh pc starts neutral and does not store") {
    TrainingUnit u(quick_cfg());
    auto d = u.train_event(kPc, kX);
    CHECK(!d.should_store);
    CHECK(!d.should_prefetch);
    CHECK(d.degree == 1);
    CHECK(!d.markov_index.has_value());
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->last0 == kX);
    CHECK(v->timestamp == 1);
    CHECK(v->reuse == 8);
    CHECK(v->base == 8);
    CHECK(v->high == 8);
}

TEST_CASE("repeating stream saturates counters and stores at distance two") {
    TrainingUnit u(quick_cfg());
    const uint64_t cyc[3] = {kX, kY, kZ};
    for (int i = 0; i < 30; ++i) u.train_event(kPc, cyc[i % 3]);
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->reuse == 15);
    CHECK(v->base == 15);
    CHECK(v->high == 15);
    CHECK(v->lookahead2);
    CHECK(v->rate == 8);

    // With lookahead engaged the stored pairs skip one step.
    auto dx = u.train_event(kPc, kX);  // history: last0=z, last1=y
    REQUIRE(dx.should_store);
    CHECK(dx.should_prefetch);
    CHECK(dx.degree == 4);
    CHECK(dx.markov_index == kY);
    auto dy = u.train_event(kPc, kY);
    CHECK(dy.markov_index == kZ);
    auto dz = u.train_event(kPc, kZ);
    CHECK(dz.markov_index == kX);
}

TEST_CASE("pattern break with immediate penalties lowers degree before it stops storing") {
    auto cfg = quick_cfg();
    cfg.use_scs = false;
    TrainingUnit u(cfg);
    const uint64_t cyc[3] = {kX, kY, kZ};
    for (int i = 0; i < 12; ++i) u.train_event(kPc, cyc[i % 3]);
    REQUIRE(u.inspect(kPc)->base == 15);
    // Each novel address after x contradicts the sampled (x -> y) pair.
    u.train_event(kPc, kX);
    u.train_event(kPc, 0x111);
    u.train_event(kPc, kX);
    u.train_event(kPc, 0x222);
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->base == 11);
    CHECK(v->high == 5);
    auto d = u.train_event(kPc, kX);
    CHECK(d.should_store);
    CHECK(d.degree == 1);
}

TEST_CASE("deferred verdict confirms late matches inside the window") {
    TrainingUnit u(quick_cfg());
    u.train_event(kPc, kX);
    u.train_event(kPc, kY);      // samples (x -> y)
    u.train_event(kPc, kX);
    u.train_event(kPc, 0x404);   // (x -> y) contradicted; y deferred
    CHECK(u.scs_occupancy() == 1);
    u.train_event(kPc, kY);      // y shows up in time
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->base == 9);
    CHECK(v->high == 9);
    CHECK(u.scs_occupancy() == 0);
    CHECK(u.stats().scs_hits == 1);
}

TEST_CASE("deferred verdict expires into the asymmetric penalty") {
    auto cfg = quick_cfg();
    cfg.scs_window = 4;
    TrainingUnit u(cfg);
    u.train_event(kPc, kX);
    u.train_event(kPc, kY);
    u.train_event(kPc, kX);
    u.train_event(kPc, 0x404);  // deferral armed at event 4, live through event 8
    for (uint64_t i = 0; i < 5; ++i) u.train_event(kPc, 0x1001 + 0x101 * i);
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->base == 6);
    CHECK(v->high == 3);
    CHECK(u.stats().scs_expiries == 1);
    CHECK(u.scs_occupancy() == 0);
}

TEST_CASE("capacity eviction of a pending verdict applies the penalty early") {
    auto cfg = quick_cfg();
    cfg.scs_entries = 2;
    TrainingUnit u(cfg);
    const uint64_t a = 0x101;
    uint64_t novel[3] = {0x1501, 0x1602, 0x1703};
    u.train_event(kPc, a);
    u.train_event(kPc, 0x202);
    for (int round = 0; round < 3; ++round) {
        u.train_event(kPc, a);
        u.train_event(kPc, novel[round]);  // each contradicts the re-armed (a -> _)
    }
    CHECK(u.stats().scs_evictions == 1);
    CHECK(u.scs_occupancy() == 2);
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->base == 6);
    CHECK(v->high == 3);
}

TEST_CASE("a contradicted target already in the cache leaves counters alone") {
    auto cfg = quick_cfg();
    TrainingUnit u(cfg, [](uint64_t line) { return line == kY; });
    u.train_event(kPc, kX);
    u.train_event(kPc, kY);
    u.train_event(kPc, kX);
    u.train_event(kPc, 0x404);
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->base == 8);
    CHECK(v->high == 8);
    CHECK(v->reuse == 9);  // the reuse-distance verdict still stands
    CHECK(u.scs_occupancy() == 0);
}

TEST_CASE("replacing a live unused sample slows the inserting pc down") {
    TrainingUnit u(quick_cfg());
    // Keys 0x100/0x200/0x300 share a sampler set; the third insert evicts.
    u.train_event(kPc, 0x100);
    u.train_event(kPc, 0x200);
    u.train_event(kPc, 0x300);
    u.train_event(kPc, 0x455);
    CHECK(u.stats().sampler_victim_live == 1);
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->rate == 7);
    CHECK(v->reuse == 8);
}

TEST_CASE("replacing a stale unused sample speeds the inserting pc up") {
    auto cfg = quick_cfg();
    cfg.max_size = 1;  // every surviving sample ages out immediately
    TrainingUnit u(cfg);
    u.train_event(kPc, 0x100);
    u.train_event(kPc, 0x200);
    u.train_event(kPc, 0x300);
    u.train_event(kPc, 0x455);
    CHECK(u.stats().sampler_victim_stale == 1);
    auto v = u.inspect(kPc);
    REQUIRE(v.has_value());
    CHECK(v->rate == 9);
    CHECK(v->reuse == 7);  // the stale victim's owner loses reuse credit
}

TEST_CASE("permissive gates store from the second event") {
    auto cfg = quick_cfg();
    cfg.gate_base = false;
    cfg.gate_reuse = false;
    TrainingUnit u(cfg);
    u.train_event(kPc, kX);
    auto d = u.train_event(kPc, kY);
    CHECK(d.should_store);
    CHECK(d.should_prefetch);
    CHECK(d.markov_index == kX);
    CHECK(d.degree == 1);
}

TEST_CASE("forced-high ablation wants distance two but lacks history at first") {
    auto cfg = quick_cfg();
    cfg.gate_base = false;
    cfg.gate_reuse = false;
    cfg.use_high = false;
    TrainingUnit u(cfg);
    u.train_event(kPc, kX);
    auto d = u.train_event(kPc, kY);
    CHECK(d.should_store);
    CHECK(d.degree == 4);
    CHECK(!d.markov_index.has_value());  // distance 2 needs two prior addresses
    auto d3 = u.train_event(kPc, kZ);
    CHECK(d3.markov_index == kX);
}

TEST_CASE("lookahead engages only at the ceiling and resets only below neutral") {
    auto cfg = quick_cfg();
    cfg.use_scs = false;
    TrainingUnit u(cfg);
    const uint64_t cyc[3] = {kX, kY, kZ};
    int engaged_at_high = -1, reset_at_base = -1;
    bool prev_look = false;
    for (int i = 0; i < 40; ++i) {
        uint64_t addr;
        if (i < 20) {
            addr = cyc[i % 3];
        } else {
            addr = (i % 2 == 0) ? kX : 0x2000 + 0x101 * i;  // mismatch barrage
        }
        u.train_event(kPc, addr);
        auto v = u.inspect(kPc);
        REQUIRE(v.has_value());
        if (!prev_look && v->lookahead2) {
            CHECK(engaged_at_high == -1);
            engaged_at_high = v->high;
        }
        if (prev_look && !v->lookahead2) {
            CHECK(reset_at_base == -1);
            reset_at_base = v->base;
        }
        prev_look = v->lookahead2;
    }
    CHECK(engaged_at_high == 15);
    CHECK(reset_at_base < 8);
}

TEST_CASE("counters stay within four bits under random traffic") {
    auto cfg = quick_cfg();
    cfg.scs_window = 16;
    TrainingUnit u(cfg);
    Lcg64 rng(99);
    std::vector<uint64_t> pcs = {0x1, 0x2, 0x3, 0x4, 0x5, 0x6, 0x7, 0x8};
    for (int i = 0; i < 30000; ++i) {
        uint64_t pc = pcs[rng.next_below(pcs.size())];
        uint64_t addr = 0x100 + rng.next_below(64) * 0x101;
        u.train_event(pc, addr);
        if (i % 100 == 0) CHECK(u.scs_occupancy() <= 64);
    }
    for (uint64_t pc : pcs) {
        auto v = u.inspect(pc);
        if (!v) continue;
        CHECK(v->reuse >= 0);
        CHECK(v->reuse <= 15);
        CHECK(v->base >= 0);
        CHECK(v->base <= 15);
        CHECK(v->high >= 0);
        CHECK(v->high <= 15);
        CHECK(v->rate >= 0);
        CHECK(v->rate <= 15);
    }
}

TEST_CASE("empirical sampling frequency tracks the formula at three rates") {
    for (int rate : {4, 8, 12}) {
        TrainingConfig cfg;  // max_size 196608
        cfg.initial_sample_rate = rate;
        cfg.seed = 7;
        TrainingUnit u(cfg);
        const int n = 1000000;
        for (int i = 0; i < n; ++i) u.train_event(kPc, (i % 2) ? 0x1001 : 0x100);
        double p = sample_probability(512, 196608, rate);
        double trials = n - 1;  // the first event has no pair yet
        double mean = trials * p;
        double sigma = std::sqrt(trials * p * (1.0 - p));
        double got = double(u.stats().sampler_inserts);
        CHECK(std::abs(got - mean) <= 3.0 * sigma);
        CHECK(u.inspect(kPc)->rate == rate);
    }
}

TEST_CASE("address shifting without classification") {
    TrainingUnit u(quick_cfg());
    auto s1 = u.shift_only(kPc, 0xA);
    CHECK(!s1.last0.has_value());
    CHECK(!s1.last1.has_value());
    auto s2 = u.shift_only(kPc, 0xB);
    CHECK(s2.last0 == 0xA);
    CHECK(!s2.last1.has_value());
    auto s3 = u.shift_only(kPc, 0xC);
    CHECK(s3.last0 == 0xB);
    CHECK(s3.last1 == 0xA);
}

TEST_CASE("table reallocates the least recent pc") {
    TrainingUnit u(quick_cfg());
    for (uint64_t pc = 0; pc < 513; ++pc) u.shift_only(pc, 0x100 + pc);
    CHECK(!u.inspect(0).has_value());
    CHECK(u.inspect(1).has_value());
    CHECK(u.inspect(512).has_value());
}
