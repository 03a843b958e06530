#include "tprefsim.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "metrics.hpp"
#include "simulator.hpp"
#include "trace.hpp"

using namespace tprefsim;

namespace {

thread_local std::string g_error;

struct Source {
    bool synthetic = false;
    std::string label;
    std::string spec;                  // synthetic sources only
    std::vector<TraceRecord> records;  // generated at run time for synthetics
};

int fail(const char* what) {
    g_error = what;
    return TPF_ERR;
}

// Returns NULL on allocation failure only; callers treat NULL as error.
char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) {
        g_error = "out of memory";
        return nullptr;
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return TPF_OK;
    } catch (const std::exception& e) {
        return fail(e.what());
    } catch (...) {
        return fail("unknown error");
    }
}

template <typename Fn>
char* guarded_string(Fn&& fn) {
    try {
        return dup_string(fn());
    } catch (const std::exception& e) {
        fail(e.what());
        return nullptr;
    } catch (...) {
        fail("unknown error");
        return nullptr;
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

struct tpf_sim {
    std::vector<KeyValue> pairs;
    std::vector<Source> sources;
    std::optional<SimReport> report;
};

extern "C" {

const char* tpf_version(void) { return "1.0.0"; }

const char* tpf_last_error(void) { return g_error.c_str(); }

void tpf_string_free(char* s) { std::free(s); }

tpf_sim* tpf_sim_new(void) { return new (std::nothrow) tpf_sim; }

void tpf_sim_free(tpf_sim* sim) { delete sim; }

int tpf_sim_config_set(tpf_sim* sim, const char* key, const char* value) {
    if (!sim || !key || !value) return fail("null argument");
    sim->pairs.push_back({key, value});
    return TPF_OK;
}

int tpf_sim_load_config_file(tpf_sim* sim, const char* path) {
    if (!sim || !path) return fail("null argument");
    return guarded([&] {
        auto pairs = load_config_file(path);
        sim->pairs.insert(sim->pairs.end(), pairs.begin(), pairs.end());
    });
}

int tpf_sim_add_trace_file(tpf_sim* sim, const char* path) {
    if (!sim || !path) return fail("null argument");
    return guarded([&] {
        Source src;
        src.label = std::string("file:") + path;
        src.records = read_trace(path);
        sim->sources.push_back(std::move(src));
    });
}

int tpf_sim_add_synthetic(tpf_sim* sim, const char* spec) {
    if (!sim || !spec) return fail("null argument");
    return guarded([&] {
        parse_synthetic(spec);  // reject malformed specs at add time
        Source src;
        src.synthetic = true;
        src.spec = spec;
        src.label = std::string("synthetic:") + spec;
        sim->sources.push_back(std::move(src));
    });
}

int tpf_sim_run(tpf_sim* sim) {
    if (!sim) return fail("null argument");
    return guarded([&] {
        RunConfig cfg = resolve_config(sim->pairs);
        std::vector<std::vector<TraceRecord>> traces;
        std::string label;
        for (const Source& src : sim->sources) {
            if (!label.empty()) label += '+';
            label += src.label;
            if (src.synthetic)
                traces.push_back(generate_trace(parse_synthetic(src.spec), cfg.seed));
            else
                traces.push_back(src.records);
        }
        Simulator simulation(cfg, std::move(traces), label);
        sim->report = simulation.run();
    });
}

char* tpf_sim_report_json(tpf_sim* sim) {
    if (!sim) {
        fail("null argument");
        return nullptr;
    }
    return guarded_string([&]() -> std::string {
        if (!sim->report) throw std::logic_error("no report: run first");
        return sim->report->to_json().dump(2);
    });
}

char* tpf_sim_report_csv_row(tpf_sim* sim) {
    if (!sim) {
        fail("null argument");
        return nullptr;
    }
    return guarded_string([&]() -> std::string {
        if (!sim->report) throw std::logic_error("no report: run first");
        return sim->report->to_csv_row();
    });
}

char* tpf_csv_header(void) {
    return guarded_string([] { return SimReport::csv_header(); });
}

char* tpf_compare_json(const char* run_json, const char* baseline_json) {
    if (!run_json || !baseline_json) {
        fail("null argument");
        return nullptr;
    }
    return guarded_string([&] {
        auto run = SimReport::from_json(nlohmann::ordered_json::parse(run_json));
        auto baseline =
            SimReport::from_json(nlohmann::ordered_json::parse(baseline_json));
        auto cmp = compare_reports(run, baseline);
        return comparison_json(run, cmp, baseline.engine).dump(2);
    });
}

char* tpf_sim_size_audit_json(tpf_sim* sim) {
    if (!sim) {
        fail("null argument");
        return nullptr;
    }
    return guarded_string([&] {
        RunConfig cfg = resolve_config(sim->pairs);
        return size_audit_json(size_audit_input(cfg)).dump(2);
    });
}

int tpf_generate_trace(const char* spec, uint64_t seed, const char* path,
                       int binary) {
    if (!spec || !path) return fail("null argument");
    return guarded([&] {
        auto records = generate_trace(parse_synthetic(spec), seed);
        if (binary || ends_with(path, ".bin"))
            write_trace_binary(path, records);
        else
            write_trace_text(path, records);
    });
}

}  // extern "C"
