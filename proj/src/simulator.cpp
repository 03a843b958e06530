#include "simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace tprefsim {

uint64_t trace_identity(const std::vector<std::vector<TraceRecord>>& traces) {
    Fnv1a64 h;
    h.update(traces.size());
    for (const auto& t : traces) h.update(t.size());
    for (const auto& t : traces)
        for (const auto& r : t) {
            h.update(r.pc);
            h.update(r.addr);
            h.update(uint64_t(r.kind));
        }
    return h.value();
}

Simulator::Simulator(const RunConfig& cfg, std::vector<std::vector<TraceRecord>> traces,
                     std::string source_label)
    : cfg_(cfg),
      traces_(std::move(traces)),
      source_(std::move(source_label)),
      l3_(cfg.l3),
      markov_(cfg.markov) {
    if (traces_.empty()) throw std::invalid_argument("simulation needs at least one trace");
    trace_hash_ = trace_identity(traces_);
    if (cfg_.sizer == SizerKind::dueller) dueller_.emplace(cfg_.dueller);
    if (cfg_.sizer == SizerKind::bloom) bloom_.emplace(cfg_.bloom);
    for (unsigned core = 0; core < traces_.size(); ++core) {
        l2s_.push_back(std::make_unique<CacheModel>(cfg_.l2));
        engines_.push_back(std::make_unique<PrefetchEngine>(
            engine_config(cfg_, core), *l2s_[core], l3_, markov_,
            dueller_ ? &*dueller_ : nullptr, bloom_ ? &*bloom_ : nullptr,
            counters_, counting_));
    }
    l3_.set_reserved_ways(cfg_.sizer_initial_ways);
    markov_.set_ways(cfg_.sizer_initial_ways);
    const char* env = std::getenv("SIM_LOG");
    log_ = env != nullptr && env[0] != '\0';
}

void Simulator::count(uint64_t& counter, uint64_t delta) {
    if (counting_) counter += delta;
}

void Simulator::apply_partition(unsigned ways) {
    ways = std::min(ways, cfg_.l3_reserved_ways_max);
    if (ways == markov_.ways()) return;
    counters_.partition_resize_evictions += l3_.set_reserved_ways(ways);
    markov_.set_ways(ways);
    ++counters_.resize_count;
    if (log_) std::fprintf(stderr, "sim: partition resized to %u ways\n", ways);
}

void Simulator::post_event() {
    if (dueller_ && dueller_->window_complete())
        apply_partition(dueller_->decide_and_reset());
    if (bloom_ && bloom_->target_ways() > markov_.ways())
        apply_partition(bloom_->target_ways());
}

void Simulator::post_record() {
    if (bloom_) {
        if (auto target = bloom_->tick_record()) apply_partition(*target);
    }
}

void Simulator::log_record(unsigned core, const TraceRecord& rec, AccessResult result,
                           const EventResult* ev) const {
    const char* what = result == AccessResult::hit ? "hit"
                       : result == AccessResult::prefetch_first_hit ? "pf_hit"
                                                                    : "miss";
    std::fprintf(stderr, "sim: rec=%llu core=%u pc=0x%llx line=0x%llx %s",
                 (unsigned long long)processed_, core,
                 (unsigned long long)rec.pc,
                 (unsigned long long)line_of(rec.addr), what);
    if (ev) {
        if (ev->stored)
            std::fprintf(stderr, " store=0x%llx",
                         (unsigned long long)*ev->store_index);
        for (const auto& p : ev->prefetches) {
            const char* out = p.outcome == PrefetchOutcome::filled_from_l3 ? "l3"
                              : p.outcome == PrefetchOutcome::filled_from_memory
                                  ? "mem"
                                  : "dup";
            std::fprintf(stderr, " pf[%u]=0x%llx:%s", p.depth,
                         (unsigned long long)p.target, out);
        }
    }
    std::fprintf(stderr, "\n");
}

void Simulator::process(unsigned core, const TraceRecord& rec) {
    counters_.partition_ways_histogram[markov_.ways()]++;
    const uint64_t line = line_of(rec.addr);
    const bool is_store = rec.kind == AccessKind::store;
    CacheModel& l2 = *l2s_[core];

    count(counters_.demand_accesses);
    const AccessOutcome out = l2.access(line, is_store);
    bool event = false;
    if (out.result == AccessResult::prefetch_first_hit) {
        if (counting_ && out.prefetch_counted) ++counters_.prefetches_used;
        event = true;
    } else if (out.result == AccessResult::miss) {
        count(counters_.l2_demand_misses);
        count(counters_.l3_data_accesses);
        const AccessOutcome o3 = l3_.access(line, false);
        if (o3.result == AccessResult::miss) {
            count(counters_.dram_reads);
            if (auto ev = l3_.fill(line, false, false, false); ev && ev->dirty)
                count(counters_.writebacks);
        }
        if (auto ev = l2.fill(line, false, is_store, false); ev && ev->dirty) {
            count(counters_.writebacks);
            if (auto ev3 = l3_.fill(ev->line, false, true, false); ev3 && ev3->dirty)
                count(counters_.writebacks);
        }
        event = true;
    }

    if (event && !(is_store && !cfg_.train_stores)) {
        const EventResult ev = engines_[core]->on_l2_event(rec.pc, line);
        if (log_) log_record(core, rec, out.result, &ev);
        post_event();
    } else if (log_) {
        log_record(core, rec, out.result, nullptr);
    }
}

SimReport Simulator::run() {
    if (ran_) throw std::logic_error("simulation already ran");
    ran_ = true;
    uint64_t total = 0;
    for (const auto& t : traces_) total += t.size();
    std::vector<size_t> next(traces_.size(), 0);
    uint64_t done = 0;
    while (done < total) {
        for (unsigned core = 0; core < traces_.size(); ++core) {
            if (next[core] >= traces_[core].size()) continue;
            counting_ = processed_ >= cfg_.warmup_records;
            process(core, traces_[core][next[core]++]);
            ++processed_;
            ++done;
            post_record();
        }
    }

    SimReport report;
    report.engine = engine_kind_name(cfg_.kind);
    report.trace_source = source_;
    report.trace_records = total;
    report.trace_hash = trace_hash_;
    report.warmup_records = cfg_.warmup_records;
    report.seed = cfg_.seed;
    report.cores = unsigned(traces_.size());
    report.counters = counters_;
    report.config_echo = config_echo(cfg_);
    return report;
}

}  // namespace tprefsim
