/*
 * C API of the sparsepush shared library.
 *
 * All functions return spx_status; on failure spx_last_error() holds a
 * human-readable message (thread-local). Results are returned through
 * opaque handles that the caller frees.
 */
#ifndef SPARSEPUSH_H
#define SPARSEPUSH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spx_status {
  SPX_OK = 0,
  SPX_ERR_INTERNAL = 1,   /* unexpected failure */
  SPX_ERR_VALIDATION = 2, /* bad config, bad arguments, malformed input */
  SPX_ERR_NUMERICAL = 3   /* numerical breakdown (bias underflow, ...) */
} spx_status;

const char* spx_version(void);

/* Message of the last failing call on this thread; empty string if none. */
const char* spx_last_error(void);

/* Optional overrides applied on top of the config file. */
typedef struct spx_run_options {
  const char* output_root; /* NULL = config/env value */
  int threads;             /* <= 0 = config value */
  int64_t seed;            /* < 0 = config value */
} spx_run_options;

/* Parse and validate a config file without running it. */
spx_status spx_validate_config(const char* config_path);

/* Run every sweep cell of the experiment; writes runlog.csv + summary.json
 * per cell and a combined sweep.csv. `opts` and `out_result` may be NULL;
 * a returned handle must be freed with spx_sweep_result_free. */
typedef struct spx_sweep_result spx_sweep_result;
spx_status spx_run_experiment(const char* config_path, const spx_run_options* opts,
                              spx_sweep_result** out_result);

size_t spx_sweep_result_cells(const spx_sweep_result* r);
const char* spx_sweep_result_sweep_csv(const spx_sweep_result* r);
const char* spx_sweep_result_cell_name(const spx_sweep_result* r, size_t cell);
double spx_sweep_result_accuracy(const spx_sweep_result* r, size_t cell);
double spx_sweep_result_divergence(const spx_sweep_result* r, size_t cell);
uint64_t spx_sweep_result_bytes(const spx_sweep_result* r, size_t cell);
double spx_sweep_result_compression_factor(const spx_sweep_result* r, size_t cell);
void spx_sweep_result_free(spx_sweep_result* r);

/* Project a sweep.csv into tidy plot data (skew,compression,algorithm,
 * accuracy). out_csv_path NULL writes to stdout. */
spx_status spx_emit_plot_data(const char* sweep_csv_path, const char* out_csv_path);

/* Standalone push-sum averaging demo on a directed ring: node i starts at
 * value i; emits "round,node,u,abs_err" rows. out_csv_path NULL writes to
 * stdout. */
spx_status spx_consensus_demo(size_t nodes, size_t rounds, double eta,
                              const char* out_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* SPARSEPUSH_H */
