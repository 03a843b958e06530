#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "util.hpp"

namespace tprefsim {

enum class AccessKind : uint8_t { load = 0, store = 1 };

struct TraceRecord {
    uint64_t pc = 0;
    uint64_t addr = 0;
    AccessKind kind = AccessKind::load;

    bool operator==(const TraceRecord&) const = default;
};

// Text format: "<pc-hex> <addr-hex> <L|S>" per line, '#' starts a comment.
// Binary format: "TPF1" magic, then 17-byte little-endian records
// (pc u64, addr u64, kind u8 with 0=load 1=store).
std::vector<TraceRecord> parse_trace_text(const std::string& text);
std::vector<TraceRecord> read_trace(const std::string& path);  // sniffs magic
void write_trace_text(const std::string& path, const std::vector<TraceRecord>& recs);
void write_trace_binary(const std::string& path, const std::vector<TraceRecord>& recs);

enum class SyntheticKind {
    cyclic,            // K distinct lines repeated R times in order
    pointer_chase,     // K lines in a seeded permuted cycle, R traversals
    random_uniform,    // N records uniform over `lines` distinct lines
    fragmented_cyclic, // cyclic, but lines spaced so upper-address tags never repeat
    bernoulli_match,   // cyclic index lines whose successors persist with prob p
};

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::cyclic;
    uint64_t k = 0;          // cycle length
    uint64_t r = 0;          // repeats
    uint64_t n = 0;          // record count (random_uniform, bernoulli_match)
    uint64_t lines = 1ULL << 21;  // random_uniform footprint (64x a 2MiB L3)
    uint64_t base = 0x10000000;
    uint64_t pc = 0x400000;
    uint64_t pcs = 1;        // random_uniform: distinct pc count
    double p = 1.0;          // bernoulli_match persistence probability
    bool has_seed = false;
    uint64_t seed = 0;
};

// Parses "name:K=100,R=10,...". Throws std::invalid_argument on unknown
// names, unknown keys, or out-of-range values.
SyntheticSpec parse_synthetic(const std::string& text);

// Pure function of (spec, seed); spec.seed overrides default_seed.
std::vector<TraceRecord> generate_trace(const SyntheticSpec& spec, uint64_t default_seed);

}  // namespace tprefsim
