#include <cstdio>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tprefsim.h"

namespace {

struct Handle {
    tpf_sim* sim = tpf_sim_new();
    ~Handle() { tpf_sim_free(sim); }
};

std::string take(char* s) {
    REQUIRE(s != nullptr);
    std::string out(s);
    tpf_string_free(s);
    return out;
}

std::string run_report(const char* engine, const char* synthetic) {
    Handle h;
    REQUIRE(tpf_sim_config_set(h.sim, "engine.kind", engine) == TPF_OK);
    REQUIRE(tpf_sim_config_set(h.sim, "l2.size", "65536") == TPF_OK);
    REQUIRE(tpf_sim_add_synthetic(h.sim, synthetic) == TPF_OK);
    REQUIRE(tpf_sim_run(h.sim) == TPF_OK);
    return take(tpf_sim_report_json(h.sim));
}

}  // namespace

TEST_CASE("the c api runs a simulation end to end") {
    auto text = run_report("triangel", "cyclic:K=2048,R=20");
    auto j = nlohmann::json::parse(text);
    CHECK(j["engine"] == "triangel");
    CHECK(j["trace"]["source"] == "synthetic:cyclic:K=2048,R=20");
    CHECK(j["trace"]["records"] == 2048 * 20);
    CHECK(j["counters"]["prefetches_issued"].get<uint64_t>() > 0);
    CHECK(j["config"]["l2.size"] == 65536);
}

TEST_CASE("errors carry messages and never crash") {
    CHECK(tpf_sim_config_set(nullptr, "a", "b") == TPF_ERR);
    CHECK(std::string(tpf_last_error()) == "null argument");

    Handle h;
    CHECK(tpf_sim_add_synthetic(h.sim, "nonsense:Q=1") == TPF_ERR);
    CHECK(std::string(tpf_last_error()).find("nonsense") != std::string::npos);

    CHECK(tpf_sim_report_json(h.sim) == nullptr);
    CHECK(std::string(tpf_last_error()).find("run first") != std::string::npos);

    CHECK(tpf_sim_config_set(h.sim, "bogus.key", "1") == TPF_OK);
    CHECK(tpf_sim_add_synthetic(h.sim, "cyclic:K=4,R=1") == TPF_OK);
    CHECK(tpf_sim_run(h.sim) == TPF_ERR);
    CHECK(std::string(tpf_last_error()).find("bogus.key") != std::string::npos);

    CHECK(tpf_sim_load_config_file(h.sim, "/no/such/file.cfg") == TPF_ERR);
    tpf_string_free(nullptr);
}

TEST_CASE("reruns of one handle are identical") {
    Handle h;
    REQUIRE(tpf_sim_config_set(h.sim, "engine.kind", "triage_deg1") == TPF_OK);
    REQUIRE(tpf_sim_add_synthetic(h.sim, "pointer_chase:K=500,R=4") == TPF_OK);
    REQUIRE(tpf_sim_run(h.sim) == TPF_OK);
    auto first = take(tpf_sim_report_json(h.sim));
    REQUIRE(tpf_sim_run(h.sim) == TPF_OK);
    CHECK(take(tpf_sim_report_json(h.sim)) == first);
}

TEST_CASE("csv rows follow the shared header") {
    Handle h;
    REQUIRE(tpf_sim_config_set(h.sim, "engine.kind", "none") == TPF_OK);
    REQUIRE(tpf_sim_add_synthetic(h.sim, "cyclic:K=16,R=2") == TPF_OK);
    REQUIRE(tpf_sim_run(h.sim) == TPF_OK);
    auto header = take(tpf_csv_header());
    auto row = take(tpf_sim_report_csv_row(h.sim));
    auto commas = [](const std::string& s) {
        size_t n = 0;
        for (char c : s)
            if (c == ',') ++n;
        return n;
    };
    CHECK(commas(header) == commas(row));
}

TEST_CASE("comparisons work from serialized reports") {
    auto run = run_report("triangel", "cyclic:K=2048,R=20");
    auto baseline = run_report("none", "cyclic:K=2048,R=20");
    auto text = take(tpf_compare_json(run.c_str(), baseline.c_str()));
    auto j = nlohmann::json::parse(text);
    CHECK(j["coverage"].get<double>() > 0.5);
    CHECK(j["baseline_engine"] == "none");

    auto other = run_report("none", "cyclic:K=64,R=2");
    CHECK(tpf_compare_json(run.c_str(), other.c_str()) == nullptr);
    CHECK(std::string(tpf_last_error()).find("trace") != std::string::npos);
}

TEST_CASE("the size audit is available before any run") {
    Handle h;
    REQUIRE(tpf_sim_config_set(h.sim, "engine.kind", "triangel") == TPF_OK);
    auto j = nlohmann::json::parse(take(tpf_sim_size_audit_json(h.sim)));
    CHECK(j["total_bytes"] == 18050);
    CHECK(j["total_kib"] == "17.6");
}

TEST_CASE("generated trace files feed back into runs") {
    const char* path = "capi_trace.bin";
    REQUIRE(tpf_generate_trace("cyclic:K=100,R=10", 1, path, 1) == TPF_OK);

    Handle h;
    REQUIRE(tpf_sim_config_set(h.sim, "engine.kind", "none") == TPF_OK);
    REQUIRE(tpf_sim_add_trace_file(h.sim, path) == TPF_OK);
    REQUIRE(tpf_sim_run(h.sim) == TPF_OK);
    auto j = nlohmann::json::parse(take(tpf_sim_report_json(h.sim)));
    CHECK(j["trace"]["records"] == 1000);
    CHECK(j["counters"]["l2_demand_misses"] == 100);
    CHECK(j["trace"]["source"] == std::string("file:") + path);
    std::remove(path);

    CHECK(tpf_sim_add_trace_file(h.sim, "/no/such/trace.bin") == TPF_ERR);
}

TEST_CASE("multiple sources become cores") {
    Handle h;
    REQUIRE(tpf_sim_config_set(h.sim, "engine.kind", "none") == TPF_OK);
    REQUIRE(tpf_sim_add_synthetic(h.sim, "cyclic:K=100,R=1") == TPF_OK);
    REQUIRE(tpf_sim_add_synthetic(h.sim, "cyclic:K=100,R=1") == TPF_OK);
    REQUIRE(tpf_sim_run(h.sim) == TPF_OK);
    auto j = nlohmann::json::parse(take(tpf_sim_report_json(h.sim)));
    CHECK(j["run"]["cores"] == 2);
    CHECK(j["counters"]["demand_accesses"] == 200);
}

TEST_CASE("the library names a version") {
    CHECK(std::string(tpf_version()) == "1.0.0");
}
