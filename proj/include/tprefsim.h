#ifndef TPREFSIM_H
#define TPREFSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque simulation handle. Handles are not thread-safe; distinct handles
 * may run concurrently. All functions return 0 on success and a negative
 * code on failure; tpf_last_error() describes the most recent failure on
 * the calling thread. */
typedef struct tpf_sim tpf_sim;

#define TPF_OK 0
#define TPF_ERR -1

const char* tpf_version(void);

/* Message for the calling thread's most recent failed call. Never NULL. */
const char* tpf_last_error(void);

/* Frees any char* returned by a tpf_* function. NULL is ignored. */
void tpf_string_free(char* s);

tpf_sim* tpf_sim_new(void);
void tpf_sim_free(tpf_sim* sim);

/* Appends one configuration pair. Later pairs override earlier ones;
 * keys are validated when the simulation is built. */
int tpf_sim_config_set(tpf_sim* sim, const char* key, const char* value);

/* Appends every pair from a flat key=value file, in file order. */
int tpf_sim_load_config_file(tpf_sim* sim, const char* path);

/* Adds one trace source. Sources interleave round-robin per record when
 * more than one is added (one private core each, shared L3). Files load
 * eagerly; .bin paths parse as binary, anything else as text. Synthetic
 * specs generate lazily at run time with the configured seed. */
int tpf_sim_add_trace_file(tpf_sim* sim, const char* path);
int tpf_sim_add_synthetic(tpf_sim* sim, const char* spec);

/* Builds a fresh simulation from the accumulated config and sources and
 * runs it to completion. May be called again; reruns are identical. */
int tpf_sim_run(tpf_sim* sim);

/* Report accessors, valid after a successful run. Returned strings are
 * owned by the caller (tpf_string_free). */
char* tpf_sim_report_json(tpf_sim* sim);
char* tpf_sim_report_csv_row(tpf_sim* sim);
char* tpf_csv_header(void);

/* Coverage and traffic ratios of run_json relative to baseline_json.
 * Both arguments are report JSON; traces and warmup must match. */
char* tpf_compare_json(const char* run_json, const char* baseline_json);

/* Dedicated-storage audit for the handle's resolved config. */
char* tpf_sim_size_audit_json(tpf_sim* sim);

/* Writes the synthetic trace described by spec to path (binary when
 * binary != 0, text otherwise). Records generated with seed. */
int tpf_generate_trace(const char* spec, uint64_t seed, const char* path,
                       int binary);

#ifdef __cplusplus
}
#endif

#endif
