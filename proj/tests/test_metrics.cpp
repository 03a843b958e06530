#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "metrics.hpp"

using namespace tprefsim;

namespace {

SimReport sample_report() {
    SimReport r;
    r.engine = "triangel";
    r.trace_source = "synthetic:cyclic:K=4,R=2";
    r.trace_records = 8;
    r.trace_hash = 0xabcdef;
    r.warmup_records = 2;
    r.seed = 5;
    r.cores = 1;
    uint64_t v = 1;
    r.counters.demand_accesses = v++;
    r.counters.l2_demand_misses = v++;
    r.counters.prefetches_issued = 10;
    r.counters.prefetches_used = 7;
    r.counters.prefetch_duplicates = v++;
    r.counters.dram_reads = v++;
    r.counters.l3_data_accesses = v++;
    r.counters.l3_markov_accesses = v++;
    r.counters.l3_markov_reads = v++;
    r.counters.mrb_hits = v++;
    r.counters.markov_trains_suppressed = v++;
    r.counters.train_events = v++;
    r.counters.writebacks = v++;
    r.counters.target_out_of_range = v++;
    r.counters.resize_count = v++;
    r.counters.partition_resize_evictions = v++;
    for (size_t i = 0; i < r.counters.partition_ways_histogram.size(); ++i)
        r.counters.partition_ways_histogram[i] = 100 + i;
    return r;
}

size_t comma_count(const std::string& s) {
    size_t n = 0;
    for (char c : s)
        if (c == ',') ++n;
    return n;
}

}  // namespace

TEST_CASE("energy is a pure function of the raw counters") {
    SimReport r;
    r.counters.dram_reads = 7;
    r.counters.l3_data_accesses = 11;
    r.counters.l3_markov_accesses = 3;
    CHECK(r.energy_units() == 25 * 7 + 11 + 3);
}

TEST_CASE("accuracy is vacuously perfect with no prefetches") {
    SimReport r;
    CHECK(r.accuracy() == 1.0);
    r.counters.prefetches_issued = 4;
    r.counters.prefetches_used = 1;
    CHECK(r.accuracy() == doctest::Approx(0.25));
}

TEST_CASE("reports round-trip through json") {
    SimReport r = sample_report();
    r.config_echo["engine.kind"] = "triangel";
    auto j = r.to_json();
    SimReport back = SimReport::from_json(j);
    CHECK(back.engine == r.engine);
    CHECK(back.trace_hash == r.trace_hash);
    CHECK(back.warmup_records == r.warmup_records);
    CHECK(back.counters.prefetches_used == 7);
    CHECK(back.counters.partition_ways_histogram == r.counters.partition_ways_histogram);
    CHECK(back.to_json() == j);
    CHECK(j["derived"]["energy_units"].get<uint64_t>() == r.energy_units());
}

TEST_CASE("csv rows line up with the header") {
    SimReport r = sample_report();
    const std::string header = SimReport::csv_header();
    const std::string row = r.to_csv_row();
    CHECK(comma_count(header) == comma_count(row));
    CHECK(header.substr(0, 6) == "engine");
    CHECK(row.substr(0, 8) == "triangel");
}

TEST_CASE("comparisons require a matching trace and warmup") {
    SimReport base = sample_report();
    base.engine = "none";
    base.counters.l2_demand_misses = 1000;
    base.counters.dram_reads = 400;
    base.counters.l3_data_accesses = 900;
    base.counters.l3_markov_accesses = 0;

    SimReport run = sample_report();
    run.counters.l2_demand_misses = 100;
    run.counters.dram_reads = 200;
    run.counters.l3_data_accesses = 800;
    run.counters.l3_markov_accesses = 100;

    auto c = compare_reports(run, base);
    CHECK(c.coverage == doctest::Approx(0.9));
    CHECK(c.dram_traffic_ratio == doctest::Approx(0.5));
    CHECK(c.l3_traffic_ratio == doctest::Approx(1.0));

    auto j = comparison_json(run, c, base.engine);
    CHECK(j["coverage"].get<double>() == doctest::Approx(0.9));
    CHECK(j["baseline_engine"] == "none");

    SimReport other = base;
    other.trace_hash ^= 1;
    CHECK_THROWS_AS(compare_reports(run, other), std::invalid_argument);
    SimReport warm = base;
    warm.warmup_records = 99;
    CHECK_THROWS_AS(compare_reports(run, warm), std::invalid_argument);
}

TEST_CASE("coverage never goes negative") {
    SimReport base = sample_report();
    base.counters.l2_demand_misses = 100;
    SimReport worse = sample_report();
    worse.counters.l2_demand_misses = 150;
    CHECK(compare_reports(worse, base).coverage == 0.0);
}

TEST_CASE("size audit reproduces the default budget exactly") {
    auto rows = size_audit(SizeAuditInput{});
    REQUIRE(rows.size() == 5);

    CHECK(rows[0].structure == "pc_training_table");
    CHECK(rows[0].entries == 512);
    CHECK(rows[0].bits_per_entry == 122);
    CHECK(rows[0].bytes == 7808);

    CHECK(rows[1].structure == "history_sampler");
    CHECK(rows[1].bits_per_entry == 95);
    CHECK(rows[1].bytes == 6080);

    CHECK(rows[2].structure == "second_chance_sampler");
    CHECK(rows[2].entries == 64);
    CHECK(rows[2].bits_per_entry == 73);
    CHECK(rows[2].bytes == 584);

    CHECK(rows[3].structure == "metadata_reuse_buffer");
    CHECK(rows[3].bits_per_entry == 46);
    CHECK(rows[3].bytes == 1472);

    CHECK(rows[4].structure == "set_dueller");
    CHECK(rows[4].entries == 1536);
    CHECK(rows[4].bits_per_entry == 10);
    CHECK(rows[4].overhead_bits == 1488);
    CHECK(rows[4].bytes == 2106);

    auto j = size_audit_json(SizeAuditInput{});
    CHECK(j["total_bytes"].get<uint64_t>() == 18050);
    CHECK(j["total_kib"].get<std::string>() == "17.6");
}

TEST_CASE("size audit scales with configured entry counts") {
    SizeAuditInput in;
    in.training_entries = 1024;  // index fields widen to 10 bits
    auto rows = size_audit(in);
    CHECK(rows[0].bytes == 1024 * 122 / 8);
    CHECK(rows[1].bits_per_entry == 96);
    CHECK(rows[2].bits_per_entry == 74);
}
