#include "config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tprefsim {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const uint64_t r = std::stoull(v, &pos, 0);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid integer for " + key + ": " + v);
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int r = std::stoi(v, &pos, 0);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid integer for " + key + ": " + v);
    }
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid number for " + key + ": " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("invalid boolean for " + key + ": " + v);
}

void apply_kind_defaults(RunConfig& c) {
    switch (c.kind) {
        case EngineKind::none:
            c.markov.format = EntryFormat::triangel42;
            c.sizer = SizerKind::fixed;
            c.sizer_fixed_ways = 0;
            c.mrb_enabled = false;
            break;
        case EngineKind::triage_deg1:
        case EngineKind::triage_deg4:
        case EngineKind::triage_deg4_look2:
            c.markov.format = EntryFormat::triage32;
            c.sizer = SizerKind::bloom;
            c.bloom.bias = 1.0;
            c.sizer_initial_ways = 0;
            c.mrb_enabled = false;
            break;
        case EngineKind::triangel:
            c.markov.format = EntryFormat::triangel42;
            c.sizer = SizerKind::dueller;
            c.sizer_initial_ways = 8;
            c.mrb_enabled = true;
            break;
        case EngineKind::triangel_bloom:
            c.markov.format = EntryFormat::triangel42;
            c.sizer = SizerKind::bloom;
            c.bloom.bias = 1.5;
            c.sizer_initial_ways = 0;
            c.mrb_enabled = true;
            break;
    }
}

unsigned entries_per_line(EntryFormat f) {
    return f == EntryFormat::triage32 ? 16 : 12;
}

}  // namespace

std::vector<KeyValue> parse_config_text(const std::string& text) {
    std::vector<KeyValue> out;
    std::istringstream in(text);
    std::string line;
    unsigned lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value, got: " + line);
        KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
        if (kv.key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key");
        out.push_back(std::move(kv));
    }
    return out;
}

std::vector<KeyValue> load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

KeyValue parse_override(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("expected key=value, got: " + arg);
    return {trim(arg.substr(0, eq)), trim(arg.substr(eq + 1))};
}

const std::vector<std::string>& ablation_names() {
    static const std::vector<std::string> names = {
        "lookahead", "base_conf", "scs", "mrb", "dueller", "reuse_conf", "high_conf"};
    return names;
}

RunConfig resolve_config(const std::vector<KeyValue>& pairs) {
    RunConfig c;
    for (const auto& kv : pairs)
        if (kv.key == "engine.kind") c.kind = parse_engine_kind(kv.value);
    apply_kind_defaults(c);

    bool fixed_ways_set = false;
    bool bloom_expected_set = false;
    for (const auto& kv : pairs) {
        const std::string& k = kv.key;
        const std::string& v = kv.value;
        if (k == "engine.kind") {
            // consumed above
        } else if (k == "engine.max_degree") {
            c.max_degree = unsigned(parse_u64(k, v));
        } else if (k == "engine.mrb_enabled") {
            c.mrb_enabled = parse_bool(k, v);
        } else if (k == "engine.prefetch_fill_l3") {
            c.prefetch_fill_l3 = parse_bool(k, v);
        } else if (k == "l2.size") {
            c.l2.size_bytes = parse_u64(k, v);
        } else if (k == "l2.ways") {
            c.l2.ways = unsigned(parse_u64(k, v));
        } else if (k == "l3.size") {
            c.l3.size_bytes = parse_u64(k, v);
        } else if (k == "l3.ways") {
            c.l3.ways = unsigned(parse_u64(k, v));
        } else if (k == "l3.reserved_ways_max") {
            c.l3_reserved_ways_max = unsigned(parse_u64(k, v));
        } else if (k == "replacement") {
            const auto p = parse_replacement(v);
            c.l2.replacement = p;
            c.l3.replacement = p;
        } else if (k == "markov.entry_format") {
            c.markov.format = parse_entry_format(v);
        } else if (k == "markov.lut_entries") {
            c.markov.lut_entries = unsigned(parse_u64(k, v));
        } else if (k == "markov.lut_ways") {
            c.markov.lut_ways = unsigned(parse_u64(k, v));
        } else if (k == "tables.training_entries") {
            c.training.training_entries = unsigned(parse_u64(k, v));
        } else if (k == "tables.sampler_entries") {
            c.training.sampler_entries = unsigned(parse_u64(k, v));
        } else if (k == "tables.scs_entries") {
            c.training.scs_entries = unsigned(parse_u64(k, v));
        } else if (k == "thresholds.base_up") {
            c.training.base_up = parse_int(k, v);
        } else if (k == "thresholds.base_down") {
            c.training.base_down = parse_int(k, v);
        } else if (k == "thresholds.high_up") {
            c.training.high_up = parse_int(k, v);
        } else if (k == "thresholds.high_down") {
            c.training.high_down = parse_int(k, v);
        } else if (k == "scs.window") {
            c.training.scs_window = unsigned(parse_u64(k, v));
        } else if (k == "max_size") {
            c.training.max_size = parse_u64(k, v);
        } else if (k == "sample.rate") {
            c.training.initial_sample_rate = parse_int(k, v);
        } else if (k == "sizer.kind") {
            c.sizer = parse_sizer_kind(v);
        } else if (k == "sizer.fixed_ways") {
            c.sizer_fixed_ways = unsigned(parse_u64(k, v));
            fixed_ways_set = true;
        } else if (k == "sizer.initial_ways") {
            c.sizer_initial_ways = unsigned(parse_u64(k, v));
        } else if (k == "dueller.window") {
            c.dueller.window = parse_u64(k, v);
        } else if (k == "dueller.bias") {
            c.dueller.markov_weight_divisor = unsigned(parse_u64(k, v));
        } else if (k == "bloom.bias") {
            c.bloom.bias = parse_f64(k, v);
        } else if (k == "bloom.window") {
            c.bloom.window_records = parse_u64(k, v);
        } else if (k == "bloom.fp_rate") {
            c.bloom.fp_rate = parse_f64(k, v);
        } else if (k == "bloom.expected") {
            c.bloom.expected_inserts = parse_u64(k, v);
            bloom_expected_set = true;
        } else if (k == "train.stores") {
            c.train_stores = parse_bool(k, v);
        } else if (k == "measure.warmup_records") {
            c.warmup_records = parse_u64(k, v);
        } else if (k == "seed") {
            c.seed = parse_u64(k, v);
        } else if (k == "ablate.lookahead") {
            c.ablate.lookahead = parse_bool(k, v);
        } else if (k == "ablate.base_conf") {
            c.ablate.base_conf = parse_bool(k, v);
        } else if (k == "ablate.scs") {
            c.ablate.scs = parse_bool(k, v);
        } else if (k == "ablate.mrb") {
            c.ablate.mrb = parse_bool(k, v);
        } else if (k == "ablate.dueller") {
            c.ablate.dueller = parse_bool(k, v);
        } else if (k == "ablate.reuse_conf") {
            c.ablate.reuse_conf = parse_bool(k, v);
        } else if (k == "ablate.high_conf") {
            c.ablate.high_conf = parse_bool(k, v);
        } else {
            throw std::invalid_argument("unknown config key: " + k);
        }
    }

    if (c.ablate.lookahead) c.training.use_lookahead = false;
    if (c.ablate.base_conf) c.training.gate_base = false;
    if (c.ablate.scs) c.training.use_scs = false;
    if (c.ablate.reuse_conf) c.training.gate_reuse = false;
    if (c.ablate.high_conf) c.training.use_high = false;
    if (c.ablate.mrb) c.mrb_enabled = false;
    if (c.ablate.dueller) {
        c.sizer = SizerKind::fixed;
        if (!fixed_ways_set) c.sizer_fixed_ways = 8;
    }

    if (c.max_degree < 1 || c.max_degree > 4)
        throw std::invalid_argument("engine.max_degree must be in 1..4");
    if (c.l3_reserved_ways_max > 8)
        throw std::invalid_argument("l3.reserved_ways_max must be at most 8");
    if (c.l3_reserved_ways_max >= c.l3.ways)
        throw std::invalid_argument("l3.reserved_ways_max must leave data ways");

    const uint64_t l3_sets = c.l3.size_bytes / kLineBytes / c.l3.ways;
    c.markov.sets = unsigned(l3_sets);
    c.markov.max_ways = c.l3_reserved_ways_max;

    if (c.sizer == SizerKind::fixed) c.sizer_initial_ways = c.sizer_fixed_ways;
    if (c.sizer_fixed_ways > c.l3_reserved_ways_max)
        throw std::invalid_argument("sizer.fixed_ways exceeds l3.reserved_ways_max");
    if (c.sizer_initial_ways > c.l3_reserved_ways_max)
        throw std::invalid_argument("sizer.initial_ways exceeds l3.reserved_ways_max");

    c.training.seed = c.seed;
    c.dueller.cache_sets = c.markov.sets;
    c.dueller.cache_depth = c.l3.ways;
    c.dueller.markov_depth = c.l3_reserved_ways_max;
    c.dueller.max_ways = c.l3_reserved_ways_max;
    c.dueller.seed = c.seed;
    c.bloom.entries_per_way = l3_sets * entries_per_line(c.markov.format);
    c.bloom.max_ways = c.l3_reserved_ways_max;
    // The filter must count uniques accurately up to the full partition's
    // capacity or it saturates before the table can earn its last ways.
    if (!bloom_expected_set)
        c.bloom.expected_inserts = c.bloom.entries_per_way * c.l3_reserved_ways_max;
    c.bloom.seed = c.seed;
    return c;
}

nlohmann::ordered_json config_echo(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["engine.kind"] = engine_kind_name(c.kind);
    j["engine.max_degree"] = c.max_degree;
    j["engine.mrb_enabled"] = c.mrb_enabled;
    j["engine.prefetch_fill_l3"] = c.prefetch_fill_l3;
    j["l2.size"] = c.l2.size_bytes;
    j["l2.ways"] = c.l2.ways;
    j["l3.size"] = c.l3.size_bytes;
    j["l3.ways"] = c.l3.ways;
    j["l3.reserved_ways_max"] = c.l3_reserved_ways_max;
    j["replacement"] = c.l2.replacement == ReplacementPolicy::lru      ? "lru"
                       : c.l2.replacement == ReplacementPolicy::srrip ? "srrip"
                                                                      : "fifo";
    j["markov.entry_format"] =
        c.markov.format == EntryFormat::triage32 ? "triage32" : "triangel42";
    j["markov.lut_entries"] = c.markov.lut_entries;
    j["markov.lut_ways"] = c.markov.lut_ways;
    j["tables.training_entries"] = c.training.training_entries;
    j["tables.sampler_entries"] = c.training.sampler_entries;
    j["tables.scs_entries"] = c.training.scs_entries;
    j["thresholds.base_up"] = c.training.base_up;
    j["thresholds.base_down"] = c.training.base_down;
    j["thresholds.high_up"] = c.training.high_up;
    j["thresholds.high_down"] = c.training.high_down;
    j["scs.window"] = c.training.scs_window;
    j["max_size"] = c.training.max_size;
    j["sample.rate"] = c.training.initial_sample_rate;
    j["sizer.kind"] = c.sizer == SizerKind::dueller ? "dueller"
                      : c.sizer == SizerKind::bloom ? "bloom"
                                                    : "fixed";
    j["sizer.fixed_ways"] = c.sizer_fixed_ways;
    j["sizer.initial_ways"] = c.sizer_initial_ways;
    j["dueller.window"] = c.dueller.window;
    j["dueller.bias"] = c.dueller.markov_weight_divisor;
    j["bloom.bias"] = c.bloom.bias;
    j["bloom.window"] = c.bloom.window_records;
    j["bloom.fp_rate"] = c.bloom.fp_rate;
    j["bloom.expected"] = c.bloom.expected_inserts;
    j["train.stores"] = c.train_stores;
    j["measure.warmup_records"] = c.warmup_records;
    j["seed"] = c.seed;
    j["ablate.lookahead"] = c.ablate.lookahead;
    j["ablate.base_conf"] = c.ablate.base_conf;
    j["ablate.scs"] = c.ablate.scs;
    j["ablate.mrb"] = c.ablate.mrb;
    j["ablate.dueller"] = c.ablate.dueller;
    j["ablate.reuse_conf"] = c.ablate.reuse_conf;
    j["ablate.high_conf"] = c.ablate.high_conf;
    return j;
}

std::vector<KeyValue> pairs_from_echo(const nlohmann::ordered_json& echo) {
    std::vector<KeyValue> pairs;
    for (auto it = echo.begin(); it != echo.end(); ++it) {
        const auto& v = it.value();
        std::string text;
        if (v.is_string())
            text = v.get<std::string>();
        else
            text = v.dump();
        pairs.push_back({it.key(), text});
    }
    return pairs;
}

EngineConfig engine_config(const RunConfig& c, unsigned core) {
    EngineConfig e;
    e.kind = c.kind;
    e.max_degree = c.max_degree;
    e.mrb_enabled = c.mrb_enabled;
    e.prefetch_fill_l3 = c.prefetch_fill_l3;
    e.training = c.training;
    e.training.seed = c.seed + uint64_t(core) * 0x9e3779b97f4a7c15ULL;
    return e;
}

SizeAuditInput size_audit_input(const RunConfig& c) {
    SizeAuditInput in;
    in.training_entries = c.training.training_entries;
    in.sampler_entries = c.training.sampler_entries;
    in.scs_entries = c.training.scs_entries;
    in.mrb_entries = 256;
    in.dueller_sampled_sets = c.dueller.sampled_sets;
    in.dueller_cache_depth = c.dueller.cache_depth;
    in.dueller_markov_depth = c.dueller.markov_depth;
    return in;
}

}  // namespace tprefsim
