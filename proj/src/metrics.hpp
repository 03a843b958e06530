#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace tprefsim {

struct SimCounters {
    uint64_t demand_accesses = 0;
    uint64_t l2_demand_misses = 0;
    uint64_t prefetches_issued = 0;
    uint64_t prefetches_used = 0;
    uint64_t prefetch_duplicates = 0;
    uint64_t dram_reads = 0;
    uint64_t l3_data_accesses = 0;
    uint64_t l3_markov_accesses = 0;
    uint64_t l3_markov_reads = 0;
    uint64_t mrb_hits = 0;
    uint64_t markov_trains_suppressed = 0;
    uint64_t train_events = 0;
    uint64_t writebacks = 0;
    uint64_t target_out_of_range = 0;
    uint64_t resize_count = 0;
    uint64_t partition_resize_evictions = 0;
    std::array<uint64_t, 9> partition_ways_histogram{};
};

struct SimReport {
    std::string engine;
    std::string trace_source;
    uint64_t trace_records = 0;
    uint64_t trace_hash = 0;
    uint64_t warmup_records = 0;
    uint64_t seed = 0;
    unsigned cores = 1;
    SimCounters counters;
    nlohmann::ordered_json config_echo;

    double accuracy() const;
    uint64_t energy_units() const;

    nlohmann::ordered_json to_json() const;
    static SimReport from_json(const nlohmann::ordered_json& j);

    std::string to_csv_row() const;
    static std::string csv_header();
};

// Baseline-relative metrics; both reports must describe the same trace.
struct Comparison {
    double coverage = 0.0;
    double dram_traffic_ratio = 0.0;
    double l3_traffic_ratio = 0.0;
};
Comparison compare_reports(const SimReport& run, const SimReport& baseline);

nlohmann::ordered_json comparison_json(const SimReport& run, const Comparison& c,
                                       const std::string& baseline_engine);

struct AuditRow {
    std::string structure;
    uint64_t entries = 0;
    uint64_t bits_per_entry = 0;
    uint64_t overhead_bits = 0;
    uint64_t bytes = 0;
};

struct SizeAuditInput {
    uint64_t training_entries = 512;
    uint64_t sampler_entries = 512;
    uint64_t scs_entries = 64;
    uint64_t mrb_entries = 256;
    uint64_t dueller_sampled_sets = 64;
    uint64_t dueller_cache_depth = 16;
    uint64_t dueller_markov_depth = 8;
};

std::vector<AuditRow> size_audit(const SizeAuditInput& in);
nlohmann::ordered_json size_audit_json(const SizeAuditInput& in);

}  // namespace tprefsim
