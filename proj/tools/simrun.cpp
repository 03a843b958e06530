#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tprefsim.h"

namespace {

struct SimDeleter {
    void operator()(tpf_sim* s) const { tpf_sim_free(s); }
};
using SimHandle = std::unique_ptr<tpf_sim, SimDeleter>;

struct Invocation {
    std::string config_path;
    std::string engine;
    bool has_seed = false;
    uint64_t seed = 1;
    std::vector<std::string> overrides;  // key=value, command-line order
    std::vector<std::string> ablates;
    std::vector<std::string> trace_paths;
    std::vector<std::string> synthetics;
};

int fail(const std::string& msg) {
    std::cerr << "simrun: " << msg << "\n";
    return 1;
}

// Later pairs win inside the core, so append file pairs first and
// command-line pairs after them.
SimHandle build_sim(const Invocation& inv, std::string* error) {
    SimHandle sim(tpf_sim_new());
    auto check = [&](int rc) {
        if (rc != TPF_OK && error->empty()) *error = tpf_last_error();
        return rc == TPF_OK;
    };
    if (!inv.config_path.empty() &&
        !check(tpf_sim_load_config_file(sim.get(), inv.config_path.c_str())))
        return nullptr;
    if (!inv.engine.empty() &&
        !check(tpf_sim_config_set(sim.get(), "engine.kind", inv.engine.c_str())))
        return nullptr;
    if (inv.has_seed &&
        !check(tpf_sim_config_set(sim.get(), "seed",
                                  std::to_string(inv.seed).c_str())))
        return nullptr;
    for (const auto& kv : inv.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            *error = "override must look like key=value: " + kv;
            return nullptr;
        }
        if (!check(tpf_sim_config_set(sim.get(), kv.substr(0, eq).c_str(),
                                      kv.substr(eq + 1).c_str())))
            return nullptr;
    }
    for (const auto& name : inv.ablates)
        if (!check(tpf_sim_config_set(sim.get(), ("ablate." + name).c_str(),
                                      "true")))
            return nullptr;
    for (const auto& path : inv.trace_paths)
        if (!check(tpf_sim_add_trace_file(sim.get(), path.c_str())))
            return nullptr;
    for (const auto& spec : inv.synthetics)
        if (!check(tpf_sim_add_synthetic(sim.get(), spec.c_str())))
            return nullptr;
    return sim;
}

int write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    out << text;
    out.close();
    if (!out) return fail("cannot write " + out_path);
    return 0;
}

int run_once(const Invocation& inv, const std::string& out_path,
             const std::string& compare_path) {
    std::string error;
    SimHandle sim = build_sim(inv, &error);
    if (!sim) return fail(error);
    if (tpf_sim_run(sim.get()) != TPF_OK) return fail(tpf_last_error());

    char* report = tpf_sim_report_json(sim.get());
    if (!report) return fail(tpf_last_error());
    std::string text(report);
    tpf_string_free(report);

    if (!compare_path.empty()) {
        std::ifstream in(compare_path, std::ios::binary);
        if (!in) return fail("cannot read baseline " + compare_path);
        std::stringstream buf;
        buf << in.rdbuf();
        char* cmp = tpf_compare_json(text.c_str(), buf.str().c_str());
        if (!cmp) return fail(tpf_last_error());
        auto merged = nlohmann::ordered_json::parse(text);
        merged["comparison"] = nlohmann::ordered_json::parse(cmp);
        tpf_string_free(cmp);
        text = merged.dump(2);
    }
    return write_output(out_path, text + "\n");
}

// One run per variant over the same sources and seed; rows keep variant
// order. A failed variant aborts, keeping the rows before it.
int run_sweep(const Invocation& base, const std::string& dimension,
              const std::string& out_path) {
    auto colon = dimension.find(':');
    if (colon == std::string::npos)
        return fail("sweep must look like engine:a,b or ablate:x,y");
    std::string kind = dimension.substr(0, colon);
    if (kind != "engine" && kind != "ablate")
        return fail("unknown sweep dimension: " + kind);

    std::vector<std::string> variants;
    std::stringstream list(dimension.substr(colon + 1));
    for (std::string item; std::getline(list, item, ',');)
        if (!item.empty()) variants.push_back(item);
    if (variants.empty()) return fail("sweep lists no variants");

    struct Outcome {
        bool ok = false;
        std::string text;  // csv row or error
    };
    auto run_variant = [&](const std::string& variant) -> Outcome {
        Invocation inv = base;
        if (kind == "engine")
            inv.engine = variant;
        else
            inv.ablates.push_back(variant);
        std::string error;
        SimHandle sim = build_sim(inv, &error);
        if (!sim) return {false, error};
        if (tpf_sim_run(sim.get()) != TPF_OK) return {false, tpf_last_error()};
        char* row = tpf_sim_report_csv_row(sim.get());
        if (!row) return {false, tpf_last_error()};
        Outcome out{true, row};
        tpf_string_free(row);
        return out;
    };

    std::vector<std::future<Outcome>> futures;
    futures.reserve(variants.size());
    for (const auto& v : variants)
        futures.push_back(std::async(std::launch::async, run_variant, v));

    char* header = tpf_csv_header();
    std::string csv = std::string("variant,") + header + "\n";
    tpf_string_free(header);
    for (size_t i = 0; i < variants.size(); ++i) {
        Outcome out = futures[i].get();
        std::string name = kind == "engine" ? variants[i] : "ablate." + variants[i];
        if (!out.ok) {
            write_output(out_path, csv);
            return fail("variant " + name + ": " + out.text);
        }
        csv += name + "," + out.text + "\n";
    }
    return write_output(out_path, csv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven simulator of temporal prefetchers"};
    app.allow_extras();

    Invocation inv;
    std::string out_path, compare_path, sweep_dim, emit_path;
    bool size_audit = false;

    app.add_option("--engine", inv.engine,
                   "Engine kind: none, triage_deg1, triage_deg4, "
                   "triage_deg4_look2, triangel, triangel_bloom");
    app.add_option("--trace", inv.trace_paths,
                   "Trace file (repeat for multiprogrammed cores)");
    app.add_option("--synthetic", inv.synthetics,
                   "Synthetic spec, e.g. cyclic:K=100,R=10 (repeatable; "
                   "sources order as files first, then specs)");
    app.add_option("--config", inv.config_path, "Flat key=value config file");
    auto* seed_opt = app.add_option("--seed", inv.seed, "Run seed");
    app.add_option("--out", out_path, "Output path (default stdout)");
    app.add_option("--compare", compare_path,
                   "Baseline report JSON; adds a comparison block");
    app.add_option("--ablate", inv.ablates,
                   "Disable one feature: lookahead, base_conf, scs, mrb, "
                   "dueller, reuse_conf, high_conf (repeatable)");
    app.add_option("--sweep", sweep_dim,
                   "engine:a,b,... or ablate:x,y,...; one CSV row per variant");
    app.add_flag("--size-audit", size_audit,
                 "Print the structure size audit and exit");
    app.add_option("--emit-trace", emit_path,
                   "Write the --synthetic trace to a file and exit "
                   "(.bin selects the binary format)");

    CLI11_PARSE(app, argc, argv);
    inv.has_seed = seed_opt->count() > 0;

    for (const auto& extra : app.remaining()) {
        if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos)
            return fail("unrecognized argument: " + extra);
        inv.overrides.push_back(extra.substr(2));
    }

    if (size_audit) {
        std::string error;
        SimHandle sim = build_sim(inv, &error);
        if (!sim) return fail(error);
        char* audit = tpf_sim_size_audit_json(sim.get());
        if (!audit) return fail(tpf_last_error());
        std::string text(audit);
        tpf_string_free(audit);
        return write_output(out_path, text + "\n");
    }

    if (!emit_path.empty()) {
        if (inv.synthetics.size() != 1)
            return fail("--emit-trace needs exactly one --synthetic");
        if (tpf_generate_trace(inv.synthetics[0].c_str(), inv.seed,
                               emit_path.c_str(), 0) != TPF_OK)
            return fail(tpf_last_error());
        return 0;
    }

    if (inv.trace_paths.empty() && inv.synthetics.empty())
        return fail("no trace source: pass --trace or --synthetic");

    if (!sweep_dim.empty()) {
        if (!compare_path.empty())
            return fail("--sweep and --compare do not combine");
        return run_sweep(inv, sweep_dim, out_path);
    }
    return run_once(inv, out_path, compare_path);
}
