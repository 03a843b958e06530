#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "engine.hpp"
#include "metrics.hpp"
#include "trace.hpp"

namespace tprefsim {

uint64_t trace_identity(const std::vector<std::vector<TraceRecord>>& traces);

// One simulation: N traces interleaved round-robin per record. Each trace
// gets a private L2 and engine; the L3, markov partition, and sizer are
// shared. Counters accumulate only once warmup_records have been processed.
class Simulator {
public:
    Simulator(const RunConfig& cfg, std::vector<std::vector<TraceRecord>> traces,
              std::string source_label);

    SimReport run();

    unsigned partition_ways() const { return markov_.ways(); }
    const MarkovTable& markov() const { return markov_; }
    const PrefetchEngine& engine(unsigned core = 0) const { return *engines_[core]; }
    const SetDueller* dueller() const { return dueller_ ? &*dueller_ : nullptr; }
    const BloomSizer* bloom() const { return bloom_ ? &*bloom_ : nullptr; }
    const SimCounters& counters() const { return counters_; }
    const CacheModel& l2(unsigned core = 0) const { return *l2s_[core]; }
    const CacheModel& l3() const { return l3_; }

private:
    void process(unsigned core, const TraceRecord& rec);
    void post_event();
    void post_record();
    void apply_partition(unsigned ways);
    void count(uint64_t& counter, uint64_t delta = 1);
    void log_record(unsigned core, const TraceRecord& rec, AccessResult result,
                    const EventResult* ev) const;

    RunConfig cfg_;
    std::vector<std::vector<TraceRecord>> traces_;
    std::string source_;
    uint64_t trace_hash_ = 0;
    CacheModel l3_;
    MarkovTable markov_;
    std::optional<SetDueller> dueller_;
    std::optional<BloomSizer> bloom_;
    std::vector<std::unique_ptr<CacheModel>> l2s_;
    std::vector<std::unique_ptr<PrefetchEngine>> engines_;
    SimCounters counters_;
    bool counting_ = false;
    uint64_t processed_ = 0;
    bool ran_ = false;
    bool log_ = false;
};

}  // namespace tprefsim
