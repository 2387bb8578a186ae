/* FastReact C API.
 *
 * Every function returns an fr_status; on failure a human readable message
 * is available from fr_last_error() on the calling thread until the next
 * failing call. Handles are opaque and owned by the caller. */
#ifndef FASTREACT_FASTREACT_H
#define FASTREACT_FASTREACT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FASTREACT_BUILDING_LIBRARY)
#    define FR_API __declspec(dllexport)
#  else
#    define FR_API __declspec(dllimport)
#  endif
#else
#  define FR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fr_status {
  FR_OK = 0,
  FR_ERR_INVALID_ARGUMENT = 1,
  FR_ERR_PARSE = 2,
  FR_ERR_VALIDATION = 3,
  FR_ERR_CAPACITY = 4,
  FR_ERR_IO = 5,
  FR_ERR_OVERFLOW = 6,
  FR_ERR_INTERNAL = 7
} fr_status;

typedef struct fr_scenario fr_scenario;
typedef struct fr_run fr_run;

typedef struct fr_footprint_params {
  uint64_t sensors;    /* S_count */
  uint64_t history;    /* H_count */
  uint64_t conj_cols;  /* C_cols */
  uint64_t disj_rows;  /* D_rows */
  uint64_t disj_cols;  /* D_cols */
  uint64_t value_bits; /* Sz_sen */
  uint64_t ts_bits;    /* Sz_ts */
  uint64_t ports;      /* P */
} fr_footprint_params;

typedef struct fr_footprint {
  uint64_t conjunctive_bits;
  uint64_t disjunctive_bits;
  uint64_t timeseries_bits;
  uint64_t misc_bits;
} fr_footprint;

FR_API const char *fr_version(void);
FR_API const char *fr_status_string(fr_status status);
/* Never NULL; empty when the thread has not seen an error. */
FR_API const char *fr_last_error(void);

FR_API fr_status fr_scenario_open(const char *path, fr_scenario **out);
/* `origin` names the text in diagnostics and may be NULL. */
FR_API fr_status fr_scenario_from_string(const char *text, const char *origin,
                                         fr_scenario **out);
FR_API void fr_scenario_close(fr_scenario *scenario);
FR_API const char *fr_scenario_name(const fr_scenario *scenario);
/* Overrides a parameter declared in the file's [params] section. */
FR_API fr_status fr_scenario_set_param(fr_scenario *scenario, const char *key,
                                       const char *value);
FR_API fr_status fr_scenario_set_proc_delay_us(fr_scenario *scenario,
                                               uint64_t delay_us);

FR_API fr_status fr_scenario_run(const fr_scenario *scenario, fr_run **out);
FR_API void fr_run_free(fr_run *run);
/* Writes trace.csv and summary.csv, creating the directory if needed. */
FR_API fr_status fr_run_write(const fr_run *run, const char *out_dir);
/* Borrowed strings, valid until fr_run_free. NULL for a NULL run. */
FR_API const char *fr_run_trace_csv(const fr_run *run);
FR_API const char *fr_run_summary_csv(const fr_run *run);

FR_API fr_status fr_footprint_compute(const fr_footprint_params *params,
                                      fr_footprint *out);

/* Compiles a logic expression into CNF text. Writes at most `len` bytes
 * including the terminator; `needed` (may be NULL) receives the full size.
 * Returns FR_ERR_CAPACITY when the CNF exceeds the limits or the buffer is
 * too small. */
FR_API fr_status fr_expr_to_cnf(const char *expr, uint32_t max_conjuncts,
                                uint32_t max_disjuncts, char *buf, size_t len,
                                size_t *needed);

#ifdef __cplusplus
}
#endif

#endif /* FASTREACT_FASTREACT_H */
