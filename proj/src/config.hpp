#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cache.hpp"
#include "engine.hpp"
#include "json.hpp"
#include "markov.hpp"
#include "sizing.hpp"
#include "training.hpp"

namespace tprefsim {

struct AblateFlags {
    bool lookahead = false;
    bool base_conf = false;
    bool scs = false;
    bool mrb = false;
    bool dueller = false;
    bool reuse_conf = false;
    bool high_conf = false;
};

// Fully resolved run parameters. Every field maps to a config key and the
// whole struct round-trips through the report's config echo.
struct RunConfig {
    EngineKind kind = EngineKind::triangel;
    unsigned max_degree = 4;
    bool mrb_enabled = true;
    bool prefetch_fill_l3 = true;
    CacheConfig l2{512 * 1024, 8, ReplacementPolicy::lru};
    CacheConfig l3{2 * 1024 * 1024, 16, ReplacementPolicy::lru};
    unsigned l3_reserved_ways_max = 8;
    MarkovConfig markov;
    TrainingConfig training;
    SizerKind sizer = SizerKind::dueller;
    unsigned sizer_fixed_ways = 8;
    unsigned sizer_initial_ways = 8;
    DuellerConfig dueller;
    BloomConfig bloom;
    AblateFlags ablate;
    bool train_stores = true;
    uint64_t warmup_records = 0;
    uint64_t seed = 1;
};

struct KeyValue {
    std::string key, value;
};

// Flat "key = value" lines; '#' starts a comment.
std::vector<KeyValue> parse_config_text(const std::string& text);
std::vector<KeyValue> load_config_file(const std::string& path);
KeyValue parse_override(const std::string& arg);  // "key=value"

// Later pairs win; engine-dependent defaults come from the last engine.kind
// present. Ablation flags are applied after plain keys. Throws
// std::invalid_argument naming the offending key.
RunConfig resolve_config(const std::vector<KeyValue>& pairs);

nlohmann::ordered_json config_echo(const RunConfig& cfg);
std::vector<KeyValue> pairs_from_echo(const nlohmann::ordered_json& echo);

const std::vector<std::string>& ablation_names();

EngineConfig engine_config(const RunConfig& cfg, unsigned core);
SizeAuditInput size_audit_input(const RunConfig& cfg);

}  // namespace tprefsim
