#include "metrics.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <stdexcept>

namespace tprefsim {

namespace {

uint64_t index_bits(uint64_t entries) {
    return entries <= 1 ? 1 : std::bit_width(entries - 1);
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

double SimReport::accuracy() const {
    if (counters.prefetches_issued == 0) return 1.0;
    return static_cast<double>(counters.prefetches_used) /
           static_cast<double>(counters.prefetches_issued);
}

uint64_t SimReport::energy_units() const {
    return 25 * counters.dram_reads + counters.l3_data_accesses +
           counters.l3_markov_accesses;
}

nlohmann::ordered_json SimReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["engine"] = engine;
    j["trace"] = {{"source", trace_source},
                  {"records", trace_records},
                  {"identity_hash", trace_hash}};
    j["run"] = {{"seed", seed},
                {"cores", cores},
                {"warmup_records", warmup_records}};
    j["config"] = config_echo;
    nlohmann::ordered_json c;
    c["demand_accesses"] = counters.demand_accesses;
    c["l2_demand_misses"] = counters.l2_demand_misses;
    c["prefetches_issued"] = counters.prefetches_issued;
    c["prefetches_used"] = counters.prefetches_used;
    c["prefetch_duplicates"] = counters.prefetch_duplicates;
    c["dram_reads"] = counters.dram_reads;
    c["l3_data_accesses"] = counters.l3_data_accesses;
    c["l3_markov_accesses"] = counters.l3_markov_accesses;
    c["l3_markov_reads"] = counters.l3_markov_reads;
    c["mrb_hits"] = counters.mrb_hits;
    c["markov_trains_suppressed"] = counters.markov_trains_suppressed;
    c["train_events"] = counters.train_events;
    c["writebacks"] = counters.writebacks;
    c["target_out_of_range"] = counters.target_out_of_range;
    c["resize_count"] = counters.resize_count;
    c["partition_resize_evictions"] = counters.partition_resize_evictions;
    c["partition_ways_histogram"] = counters.partition_ways_histogram;
    j["counters"] = std::move(c);
    nlohmann::ordered_json d;
    d["accuracy"] = accuracy();
    d["prefetches_per_miss"] =
        counters.l2_demand_misses == 0
            ? 0.0
            : static_cast<double>(counters.prefetches_issued) /
                  static_cast<double>(counters.l2_demand_misses);
    d["energy_units"] = energy_units();
    j["derived"] = std::move(d);
    return j;
}

SimReport SimReport::from_json(const nlohmann::ordered_json& j) {
    SimReport r;
    r.engine = j.at("engine").get<std::string>();
    const auto& t = j.at("trace");
    r.trace_source = t.at("source").get<std::string>();
    r.trace_records = t.at("records").get<uint64_t>();
    r.trace_hash = t.at("identity_hash").get<uint64_t>();
    const auto& run = j.at("run");
    r.seed = run.at("seed").get<uint64_t>();
    r.cores = run.at("cores").get<unsigned>();
    r.warmup_records = run.at("warmup_records").get<uint64_t>();
    if (j.contains("config")) r.config_echo = j.at("config");
    const auto& c = j.at("counters");
    auto get = [&](const char* k) { return c.at(k).get<uint64_t>(); };
    r.counters.demand_accesses = get("demand_accesses");
    r.counters.l2_demand_misses = get("l2_demand_misses");
    r.counters.prefetches_issued = get("prefetches_issued");
    r.counters.prefetches_used = get("prefetches_used");
    r.counters.prefetch_duplicates = get("prefetch_duplicates");
    r.counters.dram_reads = get("dram_reads");
    r.counters.l3_data_accesses = get("l3_data_accesses");
    r.counters.l3_markov_accesses = get("l3_markov_accesses");
    r.counters.l3_markov_reads = get("l3_markov_reads");
    r.counters.mrb_hits = get("mrb_hits");
    r.counters.markov_trains_suppressed = get("markov_trains_suppressed");
    r.counters.train_events = get("train_events");
    r.counters.writebacks = get("writebacks");
    r.counters.target_out_of_range = get("target_out_of_range");
    r.counters.resize_count = get("resize_count");
    r.counters.partition_resize_evictions = get("partition_resize_evictions");
    const auto& h = c.at("partition_ways_histogram");
    for (size_t i = 0; i < r.counters.partition_ways_histogram.size(); ++i)
        r.counters.partition_ways_histogram[i] = h.at(i).get<uint64_t>();
    return r;
}

std::string SimReport::csv_header() {
    return "engine,trace_source,trace_records,trace_hash,seed,cores,"
           "warmup_records,demand_accesses,l2_demand_misses,prefetches_issued,"
           "prefetches_used,accuracy,prefetch_duplicates,dram_reads,"
           "l3_data_accesses,l3_markov_accesses,l3_markov_reads,mrb_hits,"
           "markov_trains_suppressed,train_events,writebacks,"
           "target_out_of_range,resize_count,partition_resize_evictions,"
           "energy_units,hist_w0,hist_w1,hist_w2,hist_w3,hist_w4,hist_w5,"
           "hist_w6,hist_w7,hist_w8";
}

std::string SimReport::to_csv_row() const {
    std::string s;
    auto add = [&](const std::string& f) {
        if (!s.empty()) s += ',';
        s += f;
    };
    auto text = [](std::string f) {
        for (char& c : f)
            if (c == ',' || c == '\n') c = ';';
        return f;
    };
    add(text(engine));
    add(text(trace_source));
    add(std::to_string(trace_records));
    add(std::to_string(trace_hash));
    add(std::to_string(seed));
    add(std::to_string(cores));
    add(std::to_string(warmup_records));
    add(std::to_string(counters.demand_accesses));
    add(std::to_string(counters.l2_demand_misses));
    add(std::to_string(counters.prefetches_issued));
    add(std::to_string(counters.prefetches_used));
    add(fixed6(accuracy()));
    add(std::to_string(counters.prefetch_duplicates));
    add(std::to_string(counters.dram_reads));
    add(std::to_string(counters.l3_data_accesses));
    add(std::to_string(counters.l3_markov_accesses));
    add(std::to_string(counters.l3_markov_reads));
    add(std::to_string(counters.mrb_hits));
    add(std::to_string(counters.markov_trains_suppressed));
    add(std::to_string(counters.train_events));
    add(std::to_string(counters.writebacks));
    add(std::to_string(counters.target_out_of_range));
    add(std::to_string(counters.resize_count));
    add(std::to_string(counters.partition_resize_evictions));
    add(std::to_string(energy_units()));
    for (uint64_t v : counters.partition_ways_histogram) add(std::to_string(v));
    return s;
}

Comparison compare_reports(const SimReport& run, const SimReport& baseline) {
    if (run.trace_hash != baseline.trace_hash)
        throw std::invalid_argument(
            "compare: trace identity mismatch (run " +
            std::to_string(run.trace_hash) + ", baseline " +
            std::to_string(baseline.trace_hash) + ")");
    if (run.warmup_records != baseline.warmup_records)
        throw std::invalid_argument("compare: warmup_records mismatch");
    Comparison c;
    const auto bm = baseline.counters.l2_demand_misses;
    if (bm > 0) {
        const auto rm = run.counters.l2_demand_misses;
        c.coverage = static_cast<double>(bm - std::min(bm, rm)) /
                     static_cast<double>(bm);
    }
    const auto bdram = baseline.counters.dram_reads;
    if (bdram > 0)
        c.dram_traffic_ratio = static_cast<double>(run.counters.dram_reads) /
                               static_cast<double>(bdram);
    const auto bl3 = baseline.counters.l3_data_accesses +
                     baseline.counters.l3_markov_accesses;
    if (bl3 > 0)
        c.l3_traffic_ratio =
            static_cast<double>(run.counters.l3_data_accesses +
                                run.counters.l3_markov_accesses) /
            static_cast<double>(bl3);
    return c;
}

nlohmann::ordered_json comparison_json(const SimReport& run, const Comparison& c,
                                       const std::string& baseline_engine) {
    nlohmann::ordered_json j;
    j["engine"] = run.engine;
    j["baseline_engine"] = baseline_engine;
    j["coverage"] = c.coverage;
    j["dram_traffic_ratio"] = c.dram_traffic_ratio;
    j["l3_traffic_ratio"] = c.l3_traffic_ratio;
    j["energy_units"] = run.energy_units();
    return j;
}

std::vector<AuditRow> size_audit(const SizeAuditInput& in) {
    std::vector<AuditRow> rows;
    const uint64_t idx = index_bits(in.training_entries);

    AuditRow train;
    train.structure = "pc_training_table";
    train.entries = in.training_entries;
    // pc tag 10, last0/last1 31, timestamp 32, four 4-bit counters,
    // lookahead flag, replacement bit.
    train.bits_per_entry = 10 + 31 + 31 + 32 + 4 * 4 + 1 + 1;
    rows.push_back(train);

    AuditRow sampler;
    sampler.structure = "history_sampler";
    sampler.entries = in.sampler_entries;
    // tag 22, target 31, training index, timestamp 32, used bit.
    sampler.bits_per_entry = 22 + 31 + idx + 32 + 1;
    rows.push_back(sampler);

    AuditRow scs;
    scs.structure = "second_chance_sampler";
    scs.entries = in.scs_entries;
    // target 31, training index, deadline 32, valid bit.
    scs.bits_per_entry = 31 + idx + 32 + 1;
    rows.push_back(scs);

    AuditRow mrb;
    mrb.structure = "metadata_reuse_buffer";
    mrb.entries = in.mrb_entries;
    // cached entry 42 (hash 10, target 31, confidence 1) plus the 4
    // markov-set bits not implied by the buffer index.
    mrb.bits_per_entry = 42 + 4;
    rows.push_back(mrb);

    AuditRow dueller;
    dueller.structure = "set_dueller";
    dueller.entries =
        in.dueller_sampled_sets * (in.dueller_cache_depth + in.dueller_markov_depth);
    dueller.bits_per_entry = 10;
    // nine 48-bit hit counters, per sampled set an 11-bit set id and a
    // 5-bit occupancy field, one 32-bit window counter.
    dueller.overhead_bits = 9 * 48 + in.dueller_sampled_sets * (11 + 5) + 32;
    rows.push_back(dueller);

    for (auto& r : rows)
        r.bytes = (r.entries * r.bits_per_entry + r.overhead_bits + 7) / 8;
    return rows;
}

nlohmann::ordered_json size_audit_json(const SizeAuditInput& in) {
    auto rows = size_audit(in);
    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    uint64_t total = 0;
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["structure"] = r.structure;
        row["entries"] = r.entries;
        row["bits_per_entry"] = r.bits_per_entry;
        row["overhead_bits"] = r.overhead_bits;
        row["bytes"] = r.bytes;
        j["rows"].push_back(std::move(row));
        total += r.bytes;
    }
    j["total_bytes"] = total;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", static_cast<double>(total) / 1024.0);
    j["total_kib"] = buf;
    return j;
}

}  // namespace tprefsim
